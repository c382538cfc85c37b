#pragma once

#include <cstdint>
#include <vector>

#include "sg/fourier_fn.hpp"

namespace sg {

// Pointwise values of the cut-off triple at one theta, with theta-derivatives.
struct BumpPoint {
  double f = 0, fp = 0;      // f, f'
  double r = 0, rp = 0;      // sqrt(f - f^2) and its derivative
  double sqf = 0, sq1mf = 0; // sqrt(f), sqrt(1 - f)
};

// Exp-flat cut-off: f = 1 on [0,eps] and [1-eps,1], f = 0 on [1/2-eps,1/2+eps],
// smoothstep transitions in between. Square roots are formed in log space so
// they keep full relative accuracy where f - f^2 is tiny.
BumpPoint bump_point(double theta, double eps);

struct BumpProfile {
  int n_theta = 0;
  double eps_flat = 0;
  RVec theta, f, g, h, fp, gp, hp;
  RVec sqrt_f1, sqrt_f2, sqrt_1mf;  // chi_[0,1/2] sqrt f, chi_[1/2,1] sqrt f, sqrt(1-f)
  RVec f2, psi;                      // chi_[1/2,1] f and psi = 1 - f2
  double psi_at(double x) const;     // psi on [0,1], not periodic
  double dpsi_at(double x) const;
};

BumpProfile make_bump_profile(int n_theta, double eps_flat);

// Integral of (2-4f) h' h^{2k-1} + 4 f' h^{2k} over the circle.
double lemma_id_integral(const BumpProfile& prof, int k);
double lemma_id_closed_form(int k);

struct UnitaryPath {
  std::vector<GridFunction> nodes;  // uniform s-grid on [0,1]
  int n() const { return nodes.empty() ? 0 : nodes.front().m(); }
  double h() const { return nodes.size() > 1 ? 1.0 / (nodes.size() - 1) : 0.0; }
  double unitarity_defect() const;
};

struct ProjectionPath {
  std::vector<GridFunction> nodes;
  double h() const { return nodes.size() > 1 ? 1.0 / (nodes.size() - 1) : 0.0; }
  double projection_defect() const;
};

double unitarity_defect(const GridFunction& U);
double projection_defect(const GridFunction& p);

// e_U on S^1 x base: [[f, g + hU], [hU* + g, 1 - f]]; theta is axis 0.
GridFunction cup_with_bott(const GridFunction& U, const BumpProfile& prof);
// Loop unitary [[f1 + f2 U, sqrt(1-f)], [sqrt(1-f), -f1 - f2 U*]] with
// f1 = chi_[0,1/2] sqrt f and f2 = chi_[1/2,1] sqrt f.
GridFunction loop_unitary(const GridFunction& U, const BumpProfile& prof);
// Constant-matrix versions used by the operator builders.
Mat cup_with_bott_at(const Mat& U, const BumpPoint& b, double theta);
Mat loop_unitary_at(const Mat& U, const BumpPoint& b, double theta);

DifferentialForm chern_even(const GridFunction& p, int k_max = 3);
DifferentialForm chern_odd(const GridFunction& U, int k_max = 3);

// 4th-order differences on the uniform s-grid, one-sided at the ends.
std::vector<GridFunction> s_derivative(const std::vector<GridFunction>& nodes);
// Relative gap between 4th- and 2nd-order s-derivatives; large means coarse.
double s_smoothness(const std::vector<GridFunction>& nodes);

// Secondary characters per s-node, stored as ds ^ (form).
std::vector<DifferentialForm> secondary_chern_odd(const UnitaryPath& path, int k_max = 3,
                                                  double coarse_tol = 0.05);
std::vector<DifferentialForm> secondary_chern_even(const ProjectionPath& path, int k_max = 3,
                                                   double coarse_tol = 0.05);
// Composite Simpson in s of the ds-components; N_s must be odd.
DifferentialForm tch(const std::vector<DifferentialForm>& secondary);

ProjectionPath cup_path(const UnitaryPath& path, const BumpProfile& prof);

// Pointwise exp(i H) for Hermitian H.
Mat expi_hermitian(const Mat& H);
// Random Hermitian trigonometric polynomial of the given degree on T^d,
// deterministic in the seed.
struct TrigHermitian {
  int n = 0, d = 0, degree = 0;
  std::vector<std::vector<int>> modes;
  std::vector<Mat> coef;  // H(x) = sum coef_k e^{2 pi i k.x} with coef_{-k} = coef_k^*
  Mat operator()(const std::vector<double>& x) const;
};
TrigHermitian random_trig_hermitian(int n, int d, int degree, double scale, uint64_t seed);
Mat random_hermitian(int n, double scale, uint64_t seed);

}  // namespace sg
