#include "sg/ktheory.hpp"

#include <cmath>
#include <random>

namespace sg {

namespace {

// log-space pieces of the smoothstep s(x) = phi(x)/(phi(x)+phi(1-x)),
// phi(x) = exp(-1/x). Returns s, sqrt(s(1-s)), sqrt(s), sqrt(1-s) and
// q = 1/x^2 + 1/(1-x)^2 so that s' = q s(1-s).
struct Step {
  double s, r, sq, sq1m, q;
};

Step smoothstep(double x) {
  Step st{};
  if (x <= 0.0) return {0.0, 0.0, 0.0, 1.0, 0.0};
  if (x >= 1.0) return {1.0, 0.0, 1.0, 0.0, 0.0};
  const double a = -1.0 / x, b = -1.0 / (1.0 - x);
  const double mx = std::max(a, b);
  const double lse = mx + std::log(std::exp(a - mx) + std::exp(b - mx));
  st.s = std::exp(a - lse);
  st.r = std::exp(0.5 * (a + b) - lse);
  st.sq = std::exp(0.5 * (a - lse));
  st.sq1m = std::exp(0.5 * (b - lse));
  st.q = 1.0 / (x * x) + 1.0 / ((1.0 - x) * (1.0 - x));
  return st;
}

}  // namespace

BumpPoint bump_point(double theta, double eps) {
  double t = theta - std::floor(theta);
  const double w = 0.5 - 2.0 * eps;
  BumpPoint b;
  if (t <= eps || t >= 1.0 - eps) {
    b.f = 1.0;
    b.sqf = 1.0;
    return b;
  }
  if (t >= 0.5 - eps && t <= 0.5 + eps) {
    b.sq1mf = 1.0;
    return b;
  }
  if (t < 0.5) {
    // f = 1 - s(x), x = (t - eps)/w
    Step st = smoothstep((t - eps) / w);
    const double sp = st.q * st.r * st.r / w;
    b.f = 1.0 - st.s;
    b.fp = -sp;
    b.r = st.r;
    b.rp = (1.0 - 2.0 * st.s) * st.r * st.q / (2.0 * w);
    b.sqf = st.sq1m;
    b.sq1mf = st.sq;
  } else {
    Step st = smoothstep((t - 0.5 - eps) / w);
    const double sp = st.q * st.r * st.r / w;
    b.f = st.s;
    b.fp = sp;
    b.r = st.r;
    b.rp = (1.0 - 2.0 * st.s) * st.r * st.q / (2.0 * w);
    b.sqf = st.sq;
    b.sq1mf = st.sq1m;
  }
  return b;
}

BumpProfile make_bump_profile(int n_theta, double eps_flat) {
  if (n_theta < 8 || n_theta % 2) throw Error("bump profile: N_theta must be even and >= 8");
  if (!(eps_flat > 0.0 && eps_flat < 0.125)) throw Error("bump profile: eps_flat must lie in (0, 1/8)");
  if (eps_flat * n_theta < 1.0) throw Error("bump profile: grid too coarse to resolve eps_flat");
  BumpProfile p;
  p.n_theta = n_theta;
  p.eps_flat = eps_flat;
  const int N = n_theta;
  for (RVec* v : {&p.theta, &p.f, &p.g, &p.h, &p.fp, &p.gp, &p.hp, &p.sqrt_f1, &p.sqrt_f2, &p.sqrt_1mf,
                  &p.f2, &p.psi})
    v->setZero(N);
  for (int j = 0; j < N; ++j) {
    const double t = static_cast<double>(j) / N;
    BumpPoint b = bump_point(t, eps_flat);
    p.theta[j] = t;
    p.f[j] = b.f;
    p.fp[j] = b.fp;
    p.sqrt_1mf[j] = b.sq1mf;
    if (2 * j <= N) {
      p.g[j] = b.r;
      p.gp[j] = b.rp;
      p.sqrt_f1[j] = b.sqf;
    } else {
      p.h[j] = b.r;
      p.hp[j] = b.rp;
      p.sqrt_f2[j] = b.sqf;
      p.f2[j] = b.f;
    }
    p.psi[j] = 1.0 - p.f2[j];
  }
  return p;
}

double BumpProfile::psi_at(double x) const {
  if (x <= 0.5) return 1.0;
  if (x >= 1.0) return 0.0;
  return 1.0 - bump_point(x, eps_flat).f;
}

double BumpProfile::dpsi_at(double x) const {
  if (x <= 0.5 || x >= 1.0) return 0.0;
  return -bump_point(x, eps_flat).fp;
}

double lemma_id_integral(const BumpProfile& prof, int k) {
  if (k < 1) throw Error("lemma integral: k must be >= 1");
  double s = 0.0;
  for (int j = 0; j < prof.n_theta; ++j) {
    const double h = prof.h[j];
    if (h == 0.0) continue;
    s += (2.0 - 4.0 * prof.f[j]) * prof.hp[j] * std::pow(h, 2 * k - 1) + 4.0 * prof.fp[j] * std::pow(h, 2 * k);
  }
  return s / prof.n_theta;
}

double lemma_id_closed_form(int k) {
  return std::exp(2.0 * std::lgamma(static_cast<double>(k)) - std::lgamma(2.0 * k));
}

double unitarity_defect(const GridFunction& U) {
  double d = 0.0;
  const Mat I = Mat::Identity(U.m(), U.m());
  for (size_t p = 0; p < U.points(); ++p) d = std::max(d, max_abs(U.at(p).adjoint() * U.at(p) - I));
  return d;
}

double projection_defect(const GridFunction& P) {
  double d = 0.0;
  for (size_t p = 0; p < P.points(); ++p) {
    Mat x = P.at(p);
    d = std::max({d, max_abs(x * x - x), max_abs(x - x.adjoint())});
  }
  return d;
}

double UnitaryPath::unitarity_defect() const {
  double d = 0.0;
  for (const auto& U : nodes) d = std::max(d, sg::unitarity_defect(U));
  return d;
}

double ProjectionPath::projection_defect() const {
  double d = 0.0;
  for (const auto& p : nodes) d = std::max(d, sg::projection_defect(p));
  return d;
}

Mat cup_with_bott_at(const Mat& U, const BumpPoint& b, double theta) {
  const Eigen::Index n = U.rows();
  double t = theta - std::floor(theta);
  const double g = (2.0 * t <= 1.0) ? b.r : 0.0;
  const double h = (2.0 * t <= 1.0) ? 0.0 : b.r;
  Mat e(2 * n, 2 * n);
  const Mat I = Mat::Identity(n, n);
  e.topLeftCorner(n, n) = b.f * I;
  e.topRightCorner(n, n) = g * I + h * U;
  e.bottomLeftCorner(n, n) = h * U.adjoint() + g * I;
  e.bottomRightCorner(n, n) = (1.0 - b.f) * I;
  return e;
}

Mat loop_unitary_at(const Mat& U, const BumpPoint& b, double theta) {
  const Eigen::Index n = U.rows();
  double t = theta - std::floor(theta);
  const double f1 = (2.0 * t <= 1.0) ? b.sqf : 0.0;
  const double f2 = (2.0 * t <= 1.0) ? 0.0 : b.sqf;
  const Mat I = Mat::Identity(n, n);
  Mat W(2 * n, 2 * n);
  W.topLeftCorner(n, n) = f1 * I + f2 * U;
  W.topRightCorner(n, n) = b.sq1mf * I;
  W.bottomLeftCorner(n, n) = b.sq1mf * I;
  W.bottomRightCorner(n, n) = -f1 * I - f2 * U.adjoint();
  return W;
}

namespace {

template <class F>
GridFunction lift_to_circle(const GridFunction& U, const BumpProfile& prof, F&& at) {
  if (unitarity_defect(U) > 1e-10) throw Error("cup product: input is not unitary");
  std::vector<int> dims{prof.n_theta};
  dims.insert(dims.end(), U.dims().begin(), U.dims().end());
  GridFunction e(dims, 2 * U.m());
  const size_t inner = U.points();
  for (int j = 0; j < prof.n_theta; ++j) {
    const double t = prof.theta[j];
    BumpPoint b = bump_point(t, prof.eps_flat);
    for (size_t q = 0; q < inner; ++q) e.at(j * inner + q) = at(Mat(U.at(q)), b, t);
  }
  e.set_warning(U.accuracy_warning());
  return e;
}

}  // namespace

GridFunction cup_with_bott(const GridFunction& U, const BumpProfile& prof) {
  return lift_to_circle(U, prof, cup_with_bott_at);
}

GridFunction loop_unitary(const GridFunction& U, const BumpProfile& prof) {
  return lift_to_circle(U, prof, loop_unitary_at);
}

namespace {

cplx two_pi_i_pow(int k) { return std::pow(cplx(0.0, kTwoPi), -k); }

double factorial(int k) { return std::tgamma(k + 1.0); }

}  // namespace

DifferentialForm chern_even(const GridFunction& p, int k_max) {
  const int d = p.dim();
  DifferentialForm P = DifferentialForm::zero_form(p);
  DifferentialForm dp = d_exterior(P);
  DifferentialForm out = trace(P);
  DifferentialForm pw = P;  // p (dp)^{2k}
  for (int k = 1; k <= k_max && 2 * k <= d; ++k) {
    pw = wedge(wedge(pw, dp, d), dp, d);
    const cplx c = ((k % 2) ? -1.0 : 1.0) * two_pi_i_pow(k) / factorial(k);
    out += c * trace(pw);
  }
  return out;
}

DifferentialForm chern_odd(const GridFunction& U, int k_max) {
  const int d = U.dim();
  DifferentialForm dU = d_exterior(DifferentialForm::zero_form(U));
  DifferentialForm a = left_mul(adjoint(U), dU);  // U^{-1} dU
  DifferentialForm a2 = wedge(a, a, d);
  DifferentialForm pw = a;
  DifferentialForm out(U.dims(), 1);
  for (int k = 0; k <= k_max && 2 * k + 1 <= d; ++k) {
    if (k > 0) pw = wedge(pw, a2, d);
    const cplx c = two_pi_i_pow(k + 1) * factorial(k) / factorial(2 * k + 1);
    out += c * trace(pw);
  }
  return out;
}

std::vector<GridFunction> s_derivative(const std::vector<GridFunction>& v) {
  const int N = static_cast<int>(v.size());
  if (N < 5) throw Error("s-derivative needs at least 5 nodes");
  const double h = 1.0 / (N - 1);
  auto comb = [&](std::initializer_list<std::pair<int, double>> terms) {
    GridFunction r(v[0].dims(), v[0].m());
    for (auto [i, c] : terms) r += (c / (12.0 * h)) * v[i];
    return r;
  };
  std::vector<GridFunction> d(N);
  d[0] = comb({{0, -25}, {1, 48}, {2, -36}, {3, 16}, {4, -3}});
  d[1] = comb({{0, -3}, {1, -10}, {2, 18}, {3, -6}, {4, 1}});
  for (int i = 2; i < N - 2; ++i) d[i] = comb({{i - 2, 1}, {i - 1, -8}, {i + 1, 8}, {i + 2, -1}});
  d[N - 2] = comb({{N - 1, 3}, {N - 2, 10}, {N - 3, -18}, {N - 4, 6}, {N - 5, -1}});
  d[N - 1] = comb({{N - 1, 25}, {N - 2, -48}, {N - 3, 36}, {N - 4, -16}, {N - 5, 3}});
  return d;
}

double s_smoothness(const std::vector<GridFunction>& v) {
  const int N = static_cast<int>(v.size());
  if (N < 5) return 0.0;
  const double h = 1.0 / (N - 1);
  double gap = 0.0, scale = 0.0;
  for (int i = 2; i < N - 2; ++i) {
    GridFunction d4 = (1.0 / (12.0 * h)) * (v[i - 2] - v[i + 2] + 8.0 * (v[i + 1] - v[i - 1]));
    GridFunction d2 = (1.0 / (2.0 * h)) * (v[i + 1] - v[i - 1]);
    gap = std::max(gap, (d4 - d2).sup_norm());
    scale = std::max(scale, d4.sup_norm());
  }
  return scale > 0.0 ? gap / scale : 0.0;
}

std::vector<DifferentialForm> secondary_chern_odd(const UnitaryPath& path, int k_max, double coarse_tol) {
  if (s_smoothness(path.nodes) > coarse_tol) throw Error("unitary path too coarse in s");
  std::vector<GridFunction> Ud = s_derivative(path.nodes);
  std::vector<DifferentialForm> out;
  for (size_t i = 0; i < path.nodes.size(); ++i) {
    const GridFunction& U = path.nodes[i];
    const int d = U.dim();
    GridFunction Ui = adjoint(U);
    GridFunction a0 = Ui * Ud[i];
    // U dU^{-1}
    DifferentialForm b = left_mul(U, d_exterior(DifferentialForm::zero_form(Ui)));
    DifferentialForm b2 = wedge(b, b, d);
    DifferentialForm pw = DifferentialForm::zero_form(a0);
    DifferentialForm acc(U.dims(), 1);
    for (int k = 0; k <= k_max && 2 * k <= d; ++k) {
      if (k > 0) pw = wedge(pw, b2, d);
      const cplx c = ((k % 2) ? -1.0 : 1.0) * two_pi_i_pow(k + 1) * factorial(k) / factorial(2 * k);
      acc += c * trace(pw);
    }
    out.push_back(ds_wedge(acc));
  }
  return out;
}

std::vector<DifferentialForm> secondary_chern_even(const ProjectionPath& path, int k_max, double coarse_tol) {
  if (s_smoothness(path.nodes) > coarse_tol) throw Error("projection path too coarse in s");
  std::vector<GridFunction> ed = s_derivative(path.nodes);
  std::vector<DifferentialForm> out;
  for (size_t i = 0; i < path.nodes.size(); ++i) {
    const GridFunction& e = path.nodes[i];
    const int d = e.dim();
    GridFunction two_e_1 = 2.0 * e - GridFunction::identity(e.dims(), e.m());
    GridFunction a0 = two_e_1 * ed[i];
    DifferentialForm de = d_exterior(DifferentialForm::zero_form(e));
    DifferentialForm de2 = wedge(de, de, d);
    DifferentialForm pw = wedge(DifferentialForm::zero_form(a0), de, d);
    DifferentialForm acc(e.dims(), 1);
    for (int k = 0; k <= k_max && 2 * k + 1 <= d; ++k) {
      if (k > 0) pw = wedge(pw, de2, d);
      const cplx c = ((k % 2) ? 1.0 : -1.0) * two_pi_i_pow(k + 1) / factorial(k);
      acc += c * trace(pw);
    }
    out.push_back(ds_wedge(acc));
  }
  return out;
}

DifferentialForm tch(const std::vector<DifferentialForm>& sec) {
  const int N = static_cast<int>(sec.size());
  if (N < 3 || N % 2 == 0) throw Error("Simpson rule needs an odd number (>= 3) of s-nodes");
  const double h = 1.0 / (N - 1);
  DifferentialForm out(sec[0].dims(), sec[0].m());
  for (int i = 0; i < N; ++i) {
    const double w = (i == 0 || i == N - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    out += (w * h / 3.0) * contract_ds(sec[i]);
  }
  return out;
}

ProjectionPath cup_path(const UnitaryPath& path, const BumpProfile& prof) {
  ProjectionPath e;
  for (const auto& U : path.nodes) e.nodes.push_back(cup_with_bott(U, prof));
  return e;
}

Mat expi_hermitian(const Mat& H) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(H));
  CVec ph = (kI * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

Mat TrigHermitian::operator()(const std::vector<double>& x) const {
  Mat H = Mat::Zero(n, n);
  for (size_t i = 0; i < modes.size(); ++i) {
    double ph = 0.0;
    bool zero = true;
    for (int a = 0; a < d; ++a) {
      ph += modes[i][a] * x[a];
      zero = zero && modes[i][a] == 0;
    }
    if (zero) {
      H += coef[i];
    } else {
      Mat t = std::exp(cplx(0.0, kTwoPi * ph)) * coef[i];
      H += t + t.adjoint();
    }
  }
  return H;
}

Mat random_hermitian(int n, double scale, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat X(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = cplx(nd(rng), nd(rng));
  return scale * hermitian_part(X);
}

TrigHermitian random_trig_hermitian(int n, int d, int degree, double scale, uint64_t seed) {
  TrigHermitian T;
  T.n = n;
  T.d = d;
  T.degree = degree;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<int> k(d, -degree);
  // enumerate the lexicographic half-space k >= 0
  while (true) {
    bool nonneg = true;
    for (int a = 0; a < d; ++a) {
      if (k[a] > 0) break;
      if (k[a] < 0) {
        nonneg = false;
        break;
      }
    }
    if (nonneg) {
      double k2 = 0;
      for (int a = 0; a < d; ++a) k2 += k[a] * k[a];
      Mat C(n, n);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) C(i, j) = cplx(nd(rng), nd(rng));
      C *= scale / (1.0 + k2);
      bool zero = k2 == 0;
      T.modes.push_back(k);
      T.coef.push_back(zero ? Mat(hermitian_part(C)) : Mat(0.5 * C));
    }
    int a = d - 1;
    while (a >= 0 && k[a] == degree) k[a--] = -degree;
    if (a < 0) break;
    ++k[a];
  }
  return T;
}

}  // namespace sg
