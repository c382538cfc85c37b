#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include <json.hpp>

#include "sg/ktheory.hpp"

namespace sg {

// Finite-dimensional stand-in for a boundary Dirac operator. All matrices act
// on C^m (x) C^n with the spinor index outermost; gamma = diag(I, -I) in that
// ordering, and the Clifford element c(d/dx) is i*gamma.
struct ModelBoundary {
  int m = 0, n = 1;
  Mat A;      // (mn x mn) Hermitian, anticommutes with gamma
  Mat gamma;  // diag(I_k, -I_k), k = mn/2
  std::optional<Mat> L;  // orthonormal basis (columns) of a Lagrangian subspace of ker A

  int dim() const { return static_cast<int>(A.rows()); }
  int half() const { return dim() / 2; }
  Mat clifford() const { return kI * gamma; }
  Mat B() const { return A.topRightCorner(half(), half()); }
  // Throws on violated invariants.
  void validate(double tol = 1e-10) const;
  double kernel_tol() const;
};

ModelBoundary make_model(const Mat& B, int m, int n);
// A = [[0, B], [B*, 0]] with B Gaussian, seeded.
ModelBoundary random_model(int m, int n, uint64_t seed);
// u = exp(iH) with H = diag(H+, H-) random Hermitian; commutes with gamma.
Mat random_block_unitary(const ModelBoundary& model, double scale, uint64_t seed);
// Lagrangian subspace of ker A given as the graph of a unitary between the
// gamma-even and gamma-odd parts of the kernel.
Mat lagrangian_graph(const ModelBoundary& model, const Mat& pairing);
// Kernel split by chirality: columns of K+ (gamma = +1) and K- (gamma = -1).
std::pair<Mat, Mat> chiral_kernel(const ModelBoundary& model);

Mat boundary_projection_Ppartial(const ModelBoundary& model);

struct BoundaryProjection {
  Mat P;       // on (C^{mn})_{x=0} + (C^{mn})_{x=1}
  double t = 0;
  Mat Ppartial, u;
};

void check_block_unitary(const ModelBoundary& model, const Mat& u, double tol = 1e-10);
BoundaryProjection build_Pt(const ModelBoundary& model, const Mat& u, double t);
BoundaryProjection build_Pt(const Mat& Ppartial, const Mat& u, double t);

struct DiscreteOperator {
  Mat H;
  RVec diag;
  bool diagonal = false;
  double cutoff = std::numeric_limits<double>::infinity();  // |lambda| resolved up to here
  int fourier_K = -1;  // circle builders: modes |k| <= K
  int fiber = 0;       // circle builders: fiber dimension per mode
  nlohmann::json provenance;
  std::string basis;

  Eigen::Index size() const { return diagonal ? diag.size() : H.rows(); }
  double hermitian_defect() const { return diagonal ? 0.0 : max_abs(H - H.adjoint()); }
};

// i*gamma*(d/dtheta + A) (x) I_coeff on span{e^{2 pi i k theta}}, |k| <= K.
// Basis order: mode outermost, then coefficient, then model index.
DiscreteOperator build_circle_dirac(const ModelBoundary& model, int K, int coeff = 1);
// orientation * i d/dtheta (x) I_fiber; spectrum {-orientation 2 pi k}.
DiscreteOperator build_circle_derivative(int K, int fiber, int orientation = 1);
// Scalar circle operator i d/dtheta + 2 pi b with spectrum {2 pi (k + b)}.
DiscreteOperator build_shifted_circle(double b, int K);

struct CompressOptions {
  int oversample = 8;        // samples per retained mode for the Fourier coefficients
  double alias_lo = 0.1, alias_hi = 0.9;
  double interior = 0.5;     // interior modes: |k| <= interior*K
  double cutoff_fraction = 0.6;
};

// Galerkin compression by a multiplication projection p(theta) sampled on a
// uniform circle grid. Rows/cols of p match the fiber of op.
DiscreteOperator compress(const DiscreteOperator& op, const GridFunction& p, const CompressOptions& opt = {});
DiscreteOperator compress(const DiscreteOperator& op, const std::function<Mat(double)>& p,
                          const CompressOptions& opt = {});
// e_u D e_u on the circle.
DiscreteOperator build_compressed_circle(const ModelBoundary& model, const Mat& u, double eps_flat, int K,
                                         const CompressOptions& opt = {});

// Reference eigenbasis of the free operator i*gamma*d/dx on [0,1] with the
// boundary condition ker(P): phi_a(x) = (e^{-i l x} w+, e^{i l (x-1)} w-),
// l = 2 pi k - sigma_j, where e^{i sigma_j} are eigenvalues of the unitary
// S mapping (b+(0), b-(1)) to (b+(1), b-(0)).
struct IntervalBasis {
  RVec lambda;
  std::vector<int> channel, mode;
  Mat W;      // (2k x mn) eigenvectors of S, columns w_j = (w+, w-)
  RVec sigma;
  int K = 0;
};
IntervalBasis interval_basis(const Mat& Pbc, int K, double tol = 1e-10);

struct IntervalOptions {
  double cutoff_fraction = 0.7;
  int quad_min = 2048;
};

// D^{psi,u}(t) = i*gamma*(d/dx + A + (1 - t psi)(u^{-1} A u - A)) with the
// boundary condition ker(bc.P), assembled in the reference eigenbasis.
DiscreteOperator build_interval_dirac(const ModelBoundary& model, const Mat& u, const BumpProfile& prof, double t,
                                      const BoundaryProjection& bc, int K, const IntervalOptions& opt = {});

// Integrals over [0,1]: Phi(w) = int e^{iwx}, Psi(w) = int psi e^{iwx}.
cplx phi_integral(double w);
class PsiIntegrals {
 public:
  PsiIntegrals(const BumpProfile& prof, int quad_points);
  cplx operator()(double w) const;
  // Values at w = 2 pi s - delta for s in [-S, S].
  std::vector<cplx> shifted(double delta, int S) const;

 private:
  int M_;
  std::vector<double> dpsi_;    // psi'(x_q)/M
  std::vector<double> moments_; // int psi x^n
};

struct ConjugationResult {
  double residual = 0;  // spectral norm of the difference on the window
  double max_entry = 0;
  int window = 0;
  int dim = 0;
};
// Compares the matrix of e_u D e_u pulled back through the loop unitary with the
// interval operator D + f2 u^{-1}[D,u] (psi = 1 - f2) and the P_{pi/4} condition,
// on the reference-basis window |k| <= window.
ConjugationResult conjugation_check(const ModelBoundary& model, const Mat& u, double eps_flat, int n_theta,
                                    int window = 6, int K_ref = 64);

struct MuSymmetryReport {
  double mu_square = 0, mu_tau = 0, mu_gamma = 0, mu_A = 0;
  double tau_A = 0, tau_gamma = 0, tau_square = 0, tau_hermitian = 0;
  double gamma_P = 0, P_A2 = 0, PAP = 0;  // worst over the t-grid
  double worst() const;
  nlohmann::json to_json() const;
};
MuSymmetryReport mu_symmetry_check(const ModelBoundary& model, const Mat& u, const std::vector<double>& t_grid);

// Boundary model of the flat 2-torus Dirac operator truncated to Fourier modes
// |k|_inf <= cutoff, tensored with C^n.
ModelBoundary torus2_boundary_model(int cutoff, int n);
// Multiplication by U(x,y) on the same truncated space (collocation on the
// (2c+1)^2 grid, exactly unitary), acting as I_spinor (x) U_h.
Mat torus2_unitary(int cutoff, int n, const std::function<Mat(double, double)>& U);

}  // namespace sg
