#include "sg/operators.hpp"

#include <cmath>
#include <map>
#include <random>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/KroneckerProduct>

namespace sg {

using nlohmann::json;

void ModelBoundary::validate(double tol) const {
  const int d = dim();
  if (d == 0 || d % 2) throw Error("model: dimension must be even and positive");
  if (m * n != d) throw Error("model: m*n does not match the matrix size");
  if (max_abs(A - A.adjoint()) > tol) throw Error("model: A is not Hermitian");
  Mat g = Mat::Zero(d, d);
  g.diagonal().head(half()).setOnes();
  g.diagonal().tail(half()).setConstant(-1.0);
  if (max_abs(gamma - g) > 0) throw Error("model: gamma must be diag(I,-I)");
  if (max_abs(gamma * A + A * gamma) > tol * std::max(1.0, A.norm())) throw Error("model: A must anticommute with gamma");
  if (L) {
    const Mat& Lb = *L;
    if (max_abs(Lb.adjoint() * Lb - Mat::Identity(Lb.cols(), Lb.cols())) > 1e-8)
      throw Error("model: L basis not orthonormal");
    if (max_abs(A * Lb) > kernel_tol() * 10) throw Error("model: L is not inside ker A");
    auto [Kp, Km] = chiral_kernel(*this);
    const Eigen::Index kd = Kp.cols() + Km.cols();
    Mat cL = clifford() * Lb;
    if (max_abs(Lb.adjoint() * cL) > 1e-8 || 2 * Lb.cols() != kd)
      throw Error("model: L violates the Lagrangian condition c(L) = L^perp in ker A");
  }
}

double ModelBoundary::kernel_tol() const { return 1e-10 * std::max(1.0, A.norm()); }

ModelBoundary make_model(const Mat& B, int m, int n) {
  const Eigen::Index k = B.rows();
  if (B.cols() != k || 2 * k != static_cast<Eigen::Index>(m) * n) throw Error("make_model: bad block size");
  ModelBoundary mb;
  mb.m = m;
  mb.n = n;
  mb.A = Mat::Zero(2 * k, 2 * k);
  mb.A.topRightCorner(k, k) = B;
  mb.A.bottomLeftCorner(k, k) = B.adjoint();
  mb.gamma = Mat::Zero(2 * k, 2 * k);
  mb.gamma.diagonal().head(k).setOnes();
  mb.gamma.diagonal().tail(k).setConstant(-1.0);
  return mb;
}

ModelBoundary random_model(int m, int n, uint64_t seed) {
  if (m % 2) throw Error("random_model: m must be even");
  const int k = m / 2;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat b(k, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) b(i, j) = cplx(nd(rng), nd(rng));
  // A (x) I_n with spinor index outermost
  Mat B = Eigen::kroneckerProduct(b, Mat::Identity(n, n));
  return make_model(B, m, n);
}

Mat random_block_unitary(const ModelBoundary& model, double scale, uint64_t seed) {
  const int k = model.half();
  Mat H = Mat::Zero(model.dim(), model.dim());
  H.topLeftCorner(k, k) = random_hermitian(k, scale, seed * 2 + 1);
  H.bottomRightCorner(k, k) = random_hermitian(k, scale, seed * 2 + 2);
  return expi_hermitian(H);
}

std::pair<Mat, Mat> chiral_kernel(const ModelBoundary& model) {
  const int k = model.half();
  Eigen::JacobiSVD<Mat> svd(model.B(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double tol = model.kernel_tol();
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > tol) ++r;
  const int z = k - r;
  Mat Kp = Mat::Zero(model.dim(), z), Km = Mat::Zero(model.dim(), z);
  // ker B* sits in the gamma = +1 block, ker B in the gamma = -1 block
  Kp.topRows(k) = svd.matrixU().rightCols(z);
  Km.bottomRows(k) = svd.matrixV().rightCols(z);
  return {Kp, Km};
}

Mat lagrangian_graph(const ModelBoundary& model, const Mat& pairing) {
  auto [Kp, Km] = chiral_kernel(model);
  if (pairing.rows() != Kp.cols() || pairing.cols() != Km.cols()) throw Error("lagrangian_graph: pairing size");
  if (max_abs(pairing.adjoint() * pairing - Mat::Identity(pairing.cols(), pairing.cols())) > 1e-10)
    throw Error("lagrangian_graph: pairing must be unitary");
  return (Kp + Km * pairing.adjoint()) / std::sqrt(2.0);
}

Mat boundary_projection_Ppartial(const ModelBoundary& model) {
  Eigen::SelfAdjointEigenSolver<Mat> es(model.A);
  const double tol = model.kernel_tol();
  const Eigen::Index d = model.dim();
  Mat P = Mat::Zero(d, d);
  int ker = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double l = es.eigenvalues()[i];
    if (l > tol) {
      P += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    } else if (std::abs(l) <= tol) {
      ++ker;
    }
  }
  if (ker > 0) {
    if (!model.L) throw Error("P_partial: A has a kernel but no Lagrangian subspace was supplied");
    if (2 * model.L->cols() != ker) throw Error("P_partial: Lagrangian has the wrong dimension");
    P += (*model.L) * model.L->adjoint();
  }
  return P;
}

void check_block_unitary(const ModelBoundary& model, const Mat& u, double tol) {
  if (u.rows() != model.dim() || u.cols() != model.dim()) throw Error("unitary has the wrong size");
  if (max_abs(u.adjoint() * u - Mat::Identity(u.rows(), u.cols())) > tol) throw Error("u is not unitary");
  if (max_abs(u * model.gamma - model.gamma * u) > tol)
    throw Error("u must commute with the Clifford element (block-diagonal in gamma)");
}

BoundaryProjection build_Pt(const Mat& Pd, const Mat& u, double t) {
  const Eigen::Index d = Pd.rows();
  if (max_abs(u.adjoint() * u - Mat::Identity(d, d)) > 1e-10) throw Error("build_Pt: u is not unitary");
  const double c = std::cos(t), s = std::sin(t);
  const Mat I = Mat::Identity(d, d);
  const Mat ui = u.adjoint();
  const Mat Q = ui * Pd * u;
  BoundaryProjection bp;
  bp.t = t;
  bp.Ppartial = Pd;
  bp.u = u;
  bp.P.resize(2 * d, 2 * d);
  bp.P.topLeftCorner(d, d) = c * c * Pd + s * s * (I - Pd);
  bp.P.topRightCorner(d, d) = -c * s * u;
  bp.P.bottomLeftCorner(d, d) = -c * s * ui;
  bp.P.bottomRightCorner(d, d) = c * c * (I - Q) + s * s * Q;
  return bp;
}

BoundaryProjection build_Pt(const ModelBoundary& model, const Mat& u, double t) {
  check_block_unitary(model, u);
  return build_Pt(boundary_projection_Ppartial(model), u, t);
}

DiscreteOperator build_circle_dirac(const ModelBoundary& model, int K, int coeff) {
  model.validate();
  const Eigen::Index d = model.dim();
  const Eigen::Index r = d * coeff;
  const Eigen::Index N = (2 * K + 1) * r;
  DiscreteOperator op;
  op.H = Mat::Zero(N, N);
  const Mat iga = kI * model.gamma * model.A;
  for (int k = -K; k <= K; ++k) {
    Mat blk = -kTwoPi * k * model.gamma + iga;
    for (int c = 0; c < coeff; ++c) {
      const Eigen::Index o = (k + K) * r + c * d;
      op.H.block(o, o, d, d) = blk;
    }
  }
  op.H = hermitian_part(op.H);
  op.fourier_K = K;
  op.fiber = static_cast<int>(r);
  op.cutoff = kTwoPi * K;
  op.basis = "fourier modes |k|<=K (outer) x coefficient x model";
  op.provenance = {{"builder", "circle_dirac"}, {"K", K}, {"coeff", coeff}, {"m", model.m}, {"n", model.n}};
  return op;
}

DiscreteOperator build_circle_derivative(int K, int fiber, int orientation) {
  if (orientation != 1 && orientation != -1) throw Error("orientation must be +1 or -1");
  const Eigen::Index N = (2 * K + 1) * fiber;
  DiscreteOperator op;
  op.H = Mat::Zero(N, N);
  for (int k = -K; k <= K; ++k)
    for (int c = 0; c < fiber; ++c) op.H((k + K) * fiber + c, (k + K) * fiber + c) = -orientation * kTwoPi * k;
  op.fourier_K = K;
  op.fiber = fiber;
  op.cutoff = kTwoPi * K;
  op.basis = "fourier modes |k|<=K (outer) x fiber";
  op.provenance = {{"builder", "circle_derivative"}, {"K", K}, {"fiber", fiber}, {"orientation", orientation}};
  return op;
}

DiscreteOperator build_shifted_circle(double b, int K) {
  DiscreteOperator op;
  op.diagonal = true;
  op.diag.resize(2 * K + 1);
  for (int k = -K; k <= K; ++k) op.diag[k + K] = kTwoPi * (k + b);
  op.fourier_K = K;
  op.fiber = 1;
  op.cutoff = kTwoPi * (K - std::abs(b) - 1.0);
  op.basis = "fourier modes |k|<=K";
  op.provenance = {{"builder", "shifted_circle"}, {"K", K}, {"b", b}};
  return op;
}

namespace {

// Fourier coefficients p_hat(j), |j| <= 2K, of samples on a uniform grid.
std::vector<Mat> fourier_coefficients(const std::vector<Mat>& samples, int J) {
  const int M = static_cast<int>(samples.size());
  const Eigen::Index r = samples[0].rows();
  if (M <= 2 * J) throw Error("compress: too few samples for the Toeplitz coefficients");
  std::vector<Mat> out(2 * J + 1, Mat::Zero(r, r));
  Eigen::FFT<double> fft;
  std::vector<cplx> line(M), hat;
  for (Eigen::Index a = 0; a < r; ++a)
    for (Eigen::Index b = 0; b < r; ++b) {
      for (int q = 0; q < M; ++q) line[q] = samples[q](a, b);
      fft.fwd(hat, line);
      for (int j = -J; j <= J; ++j) out[j + J](a, b) = hat[(j + M) % M] / static_cast<double>(M);
    }
  return out;
}

DiscreteOperator compress_samples(const DiscreteOperator& op, const std::vector<Mat>& samples,
                                  const CompressOptions& opt) {
  if (op.fourier_K < 0) throw Error("compress: operator is not in a Fourier basis");
  const int K = op.fourier_K;
  const Eigen::Index r = op.fiber;
  if (samples[0].rows() != r) throw Error("compress: projection size does not match the fiber");
  auto ph = fourier_coefficients(samples, 2 * K);
  const Eigen::Index N = (2 * K + 1) * r;
  Mat P(N, N);
  for (int k = 0; k <= 2 * K; ++k)
    for (int l = 0; l <= 2 * K; ++l) P.block(k * r, l * r, r, r) = ph[k - l + 2 * K];
  P = hermitian_part(P);
  Eigen::SelfAdjointEigenSolver<Mat> es(P);
  // Eigenvalues far from {0,1} carried by interior modes mean the projection
  // is not resolved; edge states of the truncation are expected and ignored.
  std::vector<Eigen::Index> keep;
  int edge_mid = 0;
  for (Eigen::Index i = 0; i < N; ++i) {
    const double l = es.eigenvalues()[i];
    if (l > opt.alias_lo && l < opt.alias_hi) {
      double w_int = 0.0;
      for (int k = -K; k <= K; ++k)
        if (std::abs(k) <= opt.interior * K) w_int += es.eigenvectors().col(i).segment((k + K) * r, r).squaredNorm();
      if (w_int > 0.5)
        throw Error("compress: discrete projection aliasing (eigenvalue " + std::to_string(l) +
                    " on interior modes); refine the grid");
      ++edge_mid;
    }
    if (l > 0.5) keep.push_back(i);
  }
  Mat Z(N, static_cast<Eigen::Index>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j) Z.col(j) = es.eigenvectors().col(keep[j]);
  Mat PZ = P * Z;
  DiscreteOperator out;
  out.H = hermitian_part(PZ.adjoint() * op.H * PZ);
  out.cutoff = opt.cutoff_fraction * kTwoPi * K;
  out.basis = "eigenvectors of the Toeplitz-truncated projection with eigenvalue > 1/2";
  out.provenance = op.provenance;
  out.provenance["compressed"] = {{"samples", samples.size()}, {"rank", keep.size()}, {"edge_states", edge_mid}};
  return out;
}

}  // namespace

DiscreteOperator compress(const DiscreteOperator& op, const GridFunction& p, const CompressOptions& opt) {
  if (p.dim() != 1) throw Error("compress: projection must live on the circle");
  std::vector<Mat> s(p.points());
  for (size_t q = 0; q < p.points(); ++q) s[q] = p.at(q);
  return compress_samples(op, s, opt);
}

DiscreteOperator compress(const DiscreteOperator& op, const std::function<Mat(double)>& p,
                          const CompressOptions& opt) {
  const int M = std::max(1024, opt.oversample * (2 * op.fourier_K + 1));
  std::vector<Mat> s(M);
  for (int q = 0; q < M; ++q) s[q] = p(static_cast<double>(q) / M);
  return compress_samples(op, s, opt);
}

DiscreteOperator build_compressed_circle(const ModelBoundary& model, const Mat& u, double eps_flat, int K,
                                         const CompressOptions& opt) {
  check_block_unitary(model, u);
  DiscreteOperator D = build_circle_dirac(model, K, 2);
  DiscreteOperator out = compress(
      D, [&](double th) { return cup_with_bott_at(u, bump_point(th, eps_flat), th); }, opt);
  out.provenance["builder"] = "compressed_circle";
  out.provenance["eps_flat"] = eps_flat;
  return out;
}

IntervalBasis interval_basis(const Mat& Pbc, int K, double tol) {
  const Eigen::Index d2 = Pbc.rows();
  const Eigen::Index d = d2 / 2, k = d / 2;
  if (max_abs(Pbc * Pbc - Pbc) > 1e-8 || max_abs(Pbc - Pbc.adjoint()) > 1e-8)
    throw Error("interval: boundary condition is not an orthogonal projection");
  Eigen::SelfAdjointEigenSolver<Mat> es(Pbc);
  std::vector<Eigen::Index> nul;
  for (Eigen::Index i = 0; i < d2; ++i)
    if (es.eigenvalues()[i] < 0.5) nul.push_back(i);
  if (static_cast<Eigen::Index>(nul.size()) != d)
    throw Error("interval: boundary projection has rank " + std::to_string(d2 - nul.size()) + ", expected " +
                std::to_string(d) + " (not a self-adjoint realization)");
  Mat Z(d2, d);
  for (Eigen::Index j = 0; j < d; ++j) Z.col(j) = es.eigenvectors().col(nul[j]);
  // in = (b+(0), b-(1)), out = (b+(1), b-(0))
  Mat Zin(d, d), Zout(d, d);
  Zin << Z.middleRows(0, k), Z.middleRows(d + k, k);
  Zout << Z.middleRows(d, k), Z.middleRows(k, k);
  Eigen::FullPivLU<Mat> lu(Zin);
  if (!lu.isInvertible()) throw Error("interval: boundary condition is not a graph over incoming data");
  Mat S = Zout * lu.inverse();
  if (max_abs(S.adjoint() * S - Mat::Identity(d, d)) > 1e-8)
    throw Error("interval: boundary condition is not self-adjoint (S not unitary)");
  Eigen::ComplexSchur<Mat> schur(S);
  const Mat& T = schur.matrixT();
  if (max_abs(T - Mat(T.diagonal().asDiagonal())) > 1e-8) throw Error("interval: S is not normal");
  IntervalBasis ib;
  ib.K = K;
  ib.W = schur.matrixU();
  ib.sigma.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) ib.sigma[j] = std::arg(T(j, j));
  const Eigen::Index nb = d * (2 * K + 1);
  ib.lambda.resize(nb);
  for (Eigen::Index j = 0; j < d; ++j)
    for (int kk = -K; kk <= K; ++kk) {
      const Eigen::Index a = j * (2 * K + 1) + (kk + K);
      ib.lambda[a] = kTwoPi * kk - ib.sigma[j];
      ib.channel.push_back(static_cast<int>(j));
      ib.mode.push_back(kk);
    }
  (void)tol;
  return ib;
}

cplx phi_integral(double w) {
  if (std::abs(w) < 1e-3) {
    cplx s = 0.0, t = 1.0;
    for (int n = 0; n < 12; ++n) {
      s += t / static_cast<double>(n + 1);
      t *= cplx(0.0, w) / static_cast<double>(n + 1);
    }
    return s;
  }
  return (std::exp(cplx(0.0, w)) - 1.0) / cplx(0.0, w);
}

PsiIntegrals::PsiIntegrals(const BumpProfile& prof, int quad_points) : M_(quad_points) {
  dpsi_.resize(M_);
  for (int q = 0; q < M_; ++q) dpsi_[q] = prof.dpsi_at(static_cast<double>(q) / M_) / M_;
  moments_.resize(40);
  for (int n = 0; n < 40; ++n) {
    double s = 0.0;
    for (int q = 0; q < M_; ++q) s += dpsi_[q] * std::pow(static_cast<double>(q) / M_, n + 1);
    moments_[n] = -s / (n + 1);
  }
}

cplx PsiIntegrals::operator()(double w) const {
  if (std::abs(w) <= 1.0) {
    cplx s = 0.0, t = 1.0;
    for (int n = 0; n < 40; ++n) {
      s += t * moments_[n];
      t *= cplx(0.0, w) / static_cast<double>(n + 1);
    }
    return s;
  }
  cplx J = 0.0;
  for (int q = 0; q < M_; ++q)
    if (dpsi_[q] != 0.0) J += dpsi_[q] * std::exp(cplx(0.0, w * q / M_));
  return (-1.0 - J) / cplx(0.0, w);
}

std::vector<cplx> PsiIntegrals::shifted(double delta, int S) const {
  if (2 * S + 1 > M_) throw Error("psi integrals: quadrature grid too small");
  std::vector<cplx> g(M_), back;
  for (int q = 0; q < M_; ++q) g[q] = dpsi_[q] * std::exp(cplx(0.0, -delta * q / M_));
  Eigen::FFT<double> fft;
  fft.inv(back, g);
  std::vector<cplx> out(2 * S + 1);
  for (int s = -S; s <= S; ++s) {
    const double w = kTwoPi * s - delta;
    if (std::abs(w) <= 1.0) {
      out[s + S] = (*this)(w);
    } else {
      const cplx J = back[(s + M_) % M_] * static_cast<double>(M_);
      out[s + S] = (-1.0 - J) / cplx(0.0, w);
    }
  }
  return out;
}

DiscreteOperator build_interval_dirac(const ModelBoundary& model, const Mat& u, const BumpProfile& prof, double t,
                                      const BoundaryProjection& bc, int K, const IntervalOptions& opt) {
  model.validate();
  check_block_unitary(model, u);
  const Eigen::Index d = model.dim(), k = model.half();
  IntervalBasis ib = interval_basis(bc.P, K);
  const Mat At = u.adjoint() * model.A * u;
  const Mat B0 = model.B();
  const Mat B1 = At.topRightCorner(k, k);
  const Mat Bc = B1, Bpsi = t * (B0 - B1);
  const Mat Wp = ib.W.topRows(k), Wm = ib.W.bottomRows(k);
  const Mat Mc = Wp.adjoint() * Bc * Wm;
  const Mat Mp = Wp.adjoint() * Bpsi * Wm;
  int M = opt.quad_min;
  while (M < 4 * (2 * K + 2) + 1024) M *= 2;
  PsiIntegrals psi(prof, M);
  const int S = 2 * K;
  const Eigen::Index nb = ib.lambda.size();
  const Eigen::Index L = 2 * K + 1;
  Mat T = Mat::Zero(nb, nb);
  std::map<long long, std::vector<cplx>> cache;
  const bool has_psi = max_abs(Mp) > 0.0;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      const cplx mc = Mc(i, j), mp = Mp(i, j);
      if (mc == cplx(0.0) && mp == cplx(0.0)) continue;
      const double delta = ib.sigma[i] + ib.sigma[j];
      const std::vector<cplx>* pv = nullptr;
      if (has_psi && mp != cplx(0.0)) {
        const long long key = std::llround(delta * 1e12);
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, psi.shifted(delta, S)).first;
        pv = &it->second;
      }
      for (Eigen::Index ka = 0; ka < L; ++ka)
        for (Eigen::Index kb = 0; kb < L; ++kb) {
          const Eigen::Index a = i * L + ka, b = j * L + kb;
          const int s = static_cast<int>(ka + kb) - 2 * K;
          const double w = kTwoPi * s - delta;
          cplx I = mc * phi_integral(w);
          if (pv) I += mp * (*pv)[s + S];
          T(a, b) = kI * std::exp(cplx(0.0, -ib.lambda[b])) * I;
        }
    }
  DiscreteOperator op;
  op.H = T + T.adjoint();
  op.H.diagonal() += ib.lambda.cast<cplx>();
  op.H = hermitian_part(op.H);
  op.cutoff = opt.cutoff_fraction * kTwoPi * K;
  op.basis = "reference eigenbasis of i*gamma*d/dx with the boundary condition";
  op.provenance = {{"builder", "interval_dirac"}, {"K", K},         {"t", t},        {"bc_t", bc.t},
                   {"m", model.m},                {"n", model.n}, {"eps_flat", prof.eps_flat}, {"quad", M}};
  return op;
}

ConjugationResult conjugation_check(const ModelBoundary& model, const Mat& u, double eps_flat, int n_theta,
                                    int window, int K_ref) {
  model.validate();
  check_block_unitary(model, u);
  const Eigen::Index d = model.dim(), k = model.half();
  BumpProfile prof = make_bump_profile(std::max(n_theta, 64), eps_flat);
  BoundaryProjection bc = build_Pt(Mat(Mat::Zero(d, d)), u, kPi / 4);
  K_ref = std::max(K_ref, window);
  DiscreteOperator D = build_interval_dirac(model, u, prof, 1.0, bc, K_ref);
  IntervalBasis ib = interval_basis(bc.P, K_ref);
  std::vector<Eigen::Index> idx;
  for (Eigen::Index a = 0; a < ib.lambda.size(); ++a)
    if (std::abs(ib.mode[a]) <= window) idx.push_back(a);
  const Eigen::Index nw = static_cast<Eigen::Index>(idx.size());
  const int N = n_theta;
  // J phi_a on the grid: U(theta) (phi_a(theta), 0)
  std::vector<Mat> W(N);
  for (int q = 0; q < N; ++q) {
    const double th = static_cast<double>(q) / N;
    W[q] = loop_unitary_at(u, bump_point(th, eps_flat), th);
  }
  Mat F(2 * d * N, nw);
  for (Eigen::Index c = 0; c < nw; ++c) {
    const Eigen::Index a = idx[c];
    const double l = ib.lambda[a];
    const CVec w = ib.W.col(ib.channel[a]);
    for (int q = 0; q < N; ++q) {
      const double x = static_cast<double>(q) / N;
      CVec phi = CVec::Zero(2 * d);
      phi.head(k) = std::exp(cplx(0.0, -l * x)) * w.head(k);
      phi.segment(k, k) = std::exp(cplx(0.0, l * (x - 1.0))) * w.tail(k);
      F.block(q * 2 * d, c, 2 * d, 1) = W[q] * phi;
    }
  }
  // D = i gamma (d/dtheta + A) on each of the two coefficient copies
  Mat DF(2 * d * N, nw);
  Eigen::FFT<double> fft;
  std::vector<cplx> line(N), hat, back;
  for (Eigen::Index c = 0; c < nw; ++c)
    for (Eigen::Index e = 0; e < 2 * d; ++e) {
      for (int q = 0; q < N; ++q) line[q] = F(q * 2 * d + e, c);
      fft.fwd(hat, line);
      for (int j = 0; j < N; ++j) {
        int kk = (2 * j < N) ? j : (2 * j == N ? 0 : j - N);
        hat[j] *= cplx(0.0, kTwoPi * kk);
      }
      fft.inv(back, hat);
      for (int q = 0; q < N; ++q) DF(q * 2 * d + e, c) = back[q];
    }
  const Mat iga = kI * model.gamma * model.A, ig = kI * model.gamma;
  for (int q = 0; q < N; ++q)
    for (int cc = 0; cc < 2; ++cc) {
      const Eigen::Index o = q * 2 * d + cc * d;
      Mat blk = ig * DF.middleRows(o, d) + iga * F.middleRows(o, d);
      DF.middleRows(o, d) = blk;
    }
  Mat G = F.adjoint() * DF / static_cast<double>(N);
  Mat Hw(nw, nw);
  for (Eigen::Index a = 0; a < nw; ++a)
    for (Eigen::Index b = 0; b < nw; ++b) Hw(a, b) = D.H(idx[a], idx[b]);
  Mat diff = G - Hw;
  ConjugationResult r;
  Eigen::JacobiSVD<Mat> svd(diff);
  r.residual = svd.singularValues()[0];
  r.max_entry = max_abs(diff);
  r.window = window;
  r.dim = static_cast<int>(nw);
  return r;
}

double MuSymmetryReport::worst() const {
  return std::max({mu_square, mu_tau, mu_gamma, mu_A, tau_A, tau_gamma, tau_square, tau_hermitian, gamma_P, P_A2,
                   PAP});
}

json MuSymmetryReport::to_json() const {
  return {{"mu_square_plus_I", mu_square}, {"mu_tau", mu_tau},         {"mu_gamma", mu_gamma},
          {"mu_A", mu_A},                  {"tau_A", tau_A},           {"tau_gamma", tau_gamma},
          {"tau_square_minus_I", tau_square}, {"tau_hermitian", tau_hermitian},
          {"gammaP_minus_IminusP_gamma", gamma_P}, {"commutator_P_A2", P_A2}, {"PAP_minus_cos2t_absA_P", PAP}};
}

MuSymmetryReport mu_symmetry_check(const ModelBoundary& model, const Mat& u, const std::vector<double>& t_grid) {
  model.validate();
  check_block_unitary(model, u);
  const Eigen::Index d = model.dim();
  const Mat I2 = Mat::Identity(2 * d, 2 * d);
  const Mat Z = Mat::Zero(d, d);
  const Mat c = model.clifford();
  Mat tau(2 * d, 2 * d), gt(2 * d, 2 * d), At(2 * d, 2 * d), mu(2 * d, 2 * d);
  tau << Z, u, u.adjoint(), Z;
  gt << c, Z, Z, -c;
  At << model.A, Z, Z, -(u.adjoint() * model.A * u);
  mu << Z, u, -u.adjoint(), Z;
  MuSymmetryReport r;
  r.mu_square = max_abs(mu * mu + I2);
  r.mu_tau = max_abs(mu * tau + tau * mu);
  r.mu_gamma = max_abs(mu * gt + gt * mu);
  r.mu_A = max_abs(mu * At + At * mu);
  r.tau_A = max_abs(tau * At + At * tau);
  r.tau_gamma = max_abs(tau * gt + gt * tau);
  r.tau_square = max_abs(tau * tau - I2);
  r.tau_hermitian = max_abs(tau - tau.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(At));
  const Mat absA = es.eigenvectors() * es.eigenvalues().cwiseAbs().cast<cplx>().asDiagonal() *
                   es.eigenvectors().adjoint();
  const Mat A2 = At * At;
  const Mat Pd = boundary_projection_Ppartial(model);
  for (double t : t_grid) {
    Mat P = build_Pt(Pd, u, t).P;
    r.gamma_P = std::max(r.gamma_P, max_abs(gt * P - (I2 - P) * gt));
    r.P_A2 = std::max(r.P_A2, max_abs(P * A2 - A2 * P));
    r.PAP = std::max(r.PAP, max_abs(P * At * P - std::cos(2 * t) * absA * P));
  }
  return r;
}

ModelBoundary torus2_boundary_model(int cutoff, int n) {
  const int L = 2 * cutoff + 1, NM = L * L;
  CVec b(NM);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      const int k1 = i - cutoff, k2 = j - cutoff;
      b[i * L + j] = kTwoPi * cplx(-static_cast<double>(k2), -static_cast<double>(k1));
    }
  Mat B = Eigen::kroneckerProduct(Mat(b.asDiagonal()), Mat::Identity(n, n));
  return make_model(B, 2 * NM, n);
}

Mat torus2_unitary(int cutoff, int n, const std::function<Mat(double, double)>& U) {
  const int L = 2 * cutoff + 1, NM = L * L;
  Mat F(NM, NM);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j)
      for (int p = 0; p < L; ++p)
        for (int q = 0; q < L; ++q) {
          const double ph = ((i - cutoff) * p + (j - cutoff) * q) / static_cast<double>(L);
          F(i * L + j, p * L + q) = std::exp(cplx(0.0, -kTwoPi * ph)) / static_cast<double>(L);
        }
  Mat Fn = Eigen::kroneckerProduct(F, Mat::Identity(n, n));
  Mat D = Mat::Zero(NM * n, NM * n);
  for (int p = 0; p < L; ++p)
    for (int q = 0; q < L; ++q) {
      const int g = p * L + q;
      D.block(g * n, g * n, n, n) = U(static_cast<double>(p) / L, static_cast<double>(q) / L);
    }
  Mat Uh = Fn * D * Fn.adjoint();
  Mat u = Mat::Zero(2 * NM * n, 2 * NM * n);
  u.topLeftCorner(NM * n, NM * n) = Uh;
  u.bottomRightCorner(NM * n, NM * n) = Uh;
  return u;
}

}  // namespace sg
