#include "sg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <lapacke.h>

namespace sg {

using nlohmann::json;

namespace {

// LAPACK reduction is markedly faster than Eigen's for large dense matrices.
RVec hermitian_eigenvalues(const Mat& H) {
  const Eigen::Index n = H.rows();
  if (n >= 128) {
    Mat A = H;
    RVec w(n);
    const lapack_int info = LAPACKE_zheev(LAPACK_COL_MAJOR, 'N', 'L', static_cast<lapack_int>(n),
                                          reinterpret_cast<lapack_complex_double*>(A.data()),
                                          static_cast<lapack_int>(n), w.data());
    if (info != 0) throw Error("eigenvalues: zheev failed with info " + std::to_string(info));
    return w;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("eigenvalues: eigensolver failed");
  return es.eigenvalues();
}

RVec sorted_eigs(const DiscreteOperator& op) {
  RVec e;
  if (op.diagonal) {
    e = op.diag;
  } else {
    if (op.hermitian_defect() > 1e-9 * std::max(1.0, max_abs(op.H))) throw Error("eigenvalues: operator is not Hermitian");
    e = hermitian_eigenvalues(op.H);
  }
  std::sort(e.data(), e.data() + e.size());
  return e;
}

int count_kernel(const RVec& e, double eps) {
  int k = 0;
  for (Eigen::Index i = 0; i < e.size(); ++i)
    if (std::abs(e[i]) < eps) ++k;
  return k;
}

// Least-squares polynomial fit in x, evaluated at 0.
double fit_at_zero(const std::vector<double>& x, const std::vector<double>& y, int deg) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd V(n, deg + 1);
  Eigen::VectorXd b(n);
  const double sc = x.back();
  for (int i = 0; i < n; ++i) {
    double p = 1.0;
    for (int j = 0; j <= deg; ++j) {
      V(i, j) = p;
      p *= x[i] / sc;
    }
    b[i] = y[i];
  }
  Eigen::VectorXd c = V.colPivHouseholderQr().solve(b);
  return c[0];
}

double ierfc(double x) { return std::exp(-x * x) / std::sqrt(kPi) - x * std::erfc(x); }

// Slope of the counting function on [L/2, L].
double weyl_density(const std::vector<double>& pos, double L) {
  std::vector<double> xs, ys;
  for (size_t i = 0; i < pos.size(); ++i)
    if (pos[i] >= 0.5 * L && pos[i] <= L) {
      xs.push_back(pos[i]);
      ys.push_back(static_cast<double>(i + 1));
    }
  if (xs.size() < 4) return 0.0;
  double mx = 0, my = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= xs.size();
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

}  // namespace

SpectrumData eigenvalues(const Mat& H, double eps_rel, double eps_abs) {
  DiscreteOperator op;
  op.H = H;
  return eigenvalues(op, eps_rel, eps_abs);
}

SpectrumData eigenvalues(const DiscreteOperator& op, double eps_rel, double eps_abs) {
  SpectrumData s;
  s.values = sorted_eigs(op);
  const double nrm = s.values.size() ? std::max(std::abs(s.values[0]), std::abs(s.values[s.values.size() - 1])) : 0.0;
  s.eps_ker = eps_abs > 0 ? eps_abs : eps_rel * std::max(1.0, nrm);
  s.kernel_dim = count_kernel(s.values, s.eps_ker);
  s.kernel_stable = count_kernel(s.values, 0.5 * s.eps_ker) == s.kernel_dim;
  s.cutoff = op.cutoff;
  s.provenance = op.provenance;
  return s;
}

RVec eigenvalues_only(const DiscreteOperator& op) { return sorted_eigs(op); }

json EtaEstimate::to_json() const {
  return {{"value", value},
          {"error", std::isfinite(error) ? json(error) : json("inf")},
          {"converged", converged},
          {"t_grid", t_grid},
          {"partial", partial},
          {"tail", tail},
          {"fits", {{"linear_3", fit_lin3}, {"quadratic_all", fit_quad_all}, {"quadratic_5", fit_quad5}, {"sqrt_t", fit_sqrt}}},
          {"kernel_dim", kernel_dim},
          {"xi", xi},
          {"cutoff", cutoff}};
}

EtaEstimate eta(const SpectrumData& spec, const EtaOptions& opt) {
  EtaEstimate est;
  est.kernel_dim = spec.kernel_dim;
  const RVec& ev = spec.values;
  double amax = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) amax = std::max(amax, std::abs(ev[i]));
  const double L = std::min(spec.cutoff, amax);
  est.cutoff = L;
  std::vector<double> pos, neg;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double l = ev[i];
    if (std::abs(l) < spec.eps_ker || std::abs(l) > L) continue;
    (l > 0 ? pos : neg).push_back(std::abs(l));
  }
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  if (static_cast<int>(pos.size() + neg.size()) < opt.min_count || !(L > 0)) {
    est.xi = 0.5 * est.kernel_dim;
    return est;  // not converged, infinite error
  }
  const double rp = weyl_density(pos, L), rn = weyl_density(neg, L);
  const double t0 = std::pow(opt.safety / L, 2);
  for (int i = 0; i < opt.points; ++i) {
    const double t = t0 * std::pow(opt.ratio, i);
    const double st = std::sqrt(t);
    // sum from the smallest magnitude upward for a stable result
    double s = 0.0;
    size_t a = 0, b = 0;
    while (a < pos.size() || b < neg.size()) {
      if (b >= neg.size() || (a < pos.size() && pos[a] <= neg[b])) {
        s += std::erfc(st * pos[a++]);
      } else {
        s -= std::erfc(st * neg[b++]);
      }
    }
    const double tail = (rp - rn) * ierfc(st * L) / st;
    est.t_grid.push_back(t);
    est.partial.push_back(s + tail);
    est.tail.push_back(tail);
  }
  auto head = [&](int k) {
    return std::make_pair(std::vector<double>(est.t_grid.begin(), est.t_grid.begin() + k),
                          std::vector<double>(est.partial.begin(), est.partial.begin() + k));
  };
  auto [x3, y3] = head(std::min(3, opt.points));
  auto [x5, y5] = head(std::min(5, opt.points));
  est.fit_lin3 = fit_at_zero(x3, y3, 1);
  est.fit_quad5 = fit_at_zero(x5, y5, 2);
  est.fit_quad_all = fit_at_zero(est.t_grid, est.partial, 2);
  std::vector<double> rt(est.t_grid.size());
  for (size_t i = 0; i < rt.size(); ++i) rt[i] = std::sqrt(est.t_grid[i]);
  est.fit_sqrt = fit_at_zero(rt, est.partial, 2);
  est.value = est.fit_quad5;
  const double spread = std::max({std::abs(est.fit_lin3 - est.value), std::abs(est.fit_quad_all - est.value),
                                  std::abs(est.fit_lin3 - est.fit_quad_all), std::abs(est.fit_sqrt - est.value)});
  est.error = spread + 1e-12 * (1.0 + std::abs(est.value));
  est.converged = spread <= opt.max_spread;
  if (!est.converged) est.error = std::numeric_limits<double>::infinity();
  est.xi = 0.5 * (est.value + est.kernel_dim);
  return est;
}

SpectrumFn spectrum_fn(const std::function<DiscreteOperator(double)>& builder) {
  return [builder](double s) { return eigenvalues_only(builder(s)); };
}

json FlowResult::to_json() const {
  json cr = json::array();
  for (const auto& c : crossings) cr.push_back({{"param", c.param}, {"direction", c.direction}, {"branch", c.branch}});
  return {{"sf", sf}, {"crossings", cr}, {"refinement_depth", depth}, {"evaluations", evaluations},
          {"basis_jumps", basis_jumps},
          {"convention", "+1 for a branch moving from <0 to >=0 along the path"}};
}

namespace {

struct Match {
  int offset = 0;
  double cost = 0, second = 0;
  bool clear = false;          // best local offset stands out
  bool sorted_agrees = true;   // whole-spectrum count gives the same offset
  bool ok = false;
};

double node_eps(const RVec& L, const FlowOptions& opt) {
  if (opt.eps_ker_abs > 0) return opt.eps_ker_abs;
  const double nrm = L.size() ? std::max(std::abs(L[0]), std::abs(L[L.size() - 1])) : 0.0;
  return opt.eps_ker_rel * std::max(1.0, nrm);
}

Eigen::Index first_nonneg(const RVec& L, double eps) {
  return std::lower_bound(L.data(), L.data() + L.size(), -eps) - L.data();
}

// L[z + j] <-> L'[z' + j + o]; the offset o is the flow across the step.
Match match_step(const RVec& La, const RVec& Lb, const FlowOptions& opt) {
  const int W = opt.window, maxo = opt.max_offset;
  const Eigen::Index za = first_nonneg(La, node_eps(La, opt)), zb = first_nonneg(Lb, node_eps(Lb, opt));
  const Eigen::Index na = La.size(), nb = Lb.size();
  Match m;
  m.cost = m.second = std::numeric_limits<double>::infinity();
  std::vector<double> costs(2 * maxo + 1);
  for (int o = -maxo; o <= maxo; ++o) {
    double c = 0.0;
    int valid = 0;
    for (int j = -W; j < W; ++j) {
      const Eigen::Index ia = za + j, ib = zb + j + o;
      if (ia < 0 || ia >= na || ib < 0 || ib >= nb) continue;
      c = std::max(c, std::abs(La[ia] - Lb[ib]));
      ++valid;
    }
    if (valid < std::min<Eigen::Index>(W, std::min(na, nb))) c = std::numeric_limits<double>::infinity();
    costs[o + maxo] = c;
    if (c < m.cost) {
      m.second = m.cost;
      m.cost = c;
      m.offset = o;
    } else if (c < m.second) {
      m.second = c;
    }
  }
  const double eps = std::max(node_eps(La, opt), node_eps(Lb, opt));
  m.clear = std::isfinite(m.cost) && (m.cost <= eps || m.second >= 3.0 * m.cost);
  if (na == nb) {
    // Sorted pairing of equal-size spectra is the minimal-displacement
    // assignment; its offset is the change in the negative count. It fails
    // only where the truncated basis jumps far from zero.
    const int os = static_cast<int>(za - zb);
    m.sorted_agrees = os == m.offset || (std::abs(os) <= maxo && costs[os + maxo] <= m.cost * (1.0 + 1e-12) + eps);
    if (m.sorted_agrees) m.offset = os;
  }
  m.ok = m.clear && m.sorted_agrees;
  return m;
}

struct FlowRun {
  const SpectrumFn& fn;
  const FlowOptions& opt;
  FlowResult res;
  int cum = 0;
  double span = 1.0;

  void log(double p, const RVec& L) {
    const Eigen::Index z = first_nonneg(L, node_eps(L, opt));
    for (int j = -opt.window; j < opt.window; ++j) {
      const Eigen::Index i = z + j;
      if (i >= 0 && i < L.size()) res.branches.push_back({p, static_cast<int>(j - cum), L[i]});
    }
  }

  void step(double a, const RVec& La, double b, const RVec& Lb, int depth) {
    res.depth = std::max(res.depth, depth);
    Match m = match_step(La, Lb, opt);
    const double w = std::abs(b - a);
    // A disagreement that survives refinement is a jump of the truncated basis
    // away from zero; the local match is then trusted.
    const bool jump = m.clear && !m.sorted_agrees && w <= opt.jump_width * span;
    const bool split = (!m.ok && !jump) || (m.offset != 0 && opt.locate && w > opt.locate_tol);
    if (split && depth < opt.max_depth) {
      const double mid = 0.5 * (a + b);
      RVec Lm = fn(mid);
      ++res.evaluations;
      step(a, La, mid, Lm, depth + 1);
      log(mid, Lm);
      step(mid, Lm, b, Lb, depth + 1);
      return;
    }
    if (!m.ok && !jump) {
      std::ostringstream os;
      os << std::setprecision(12) << "spectral flow: ambiguous branch matching on [" << a << ", " << b
         << "] (displacement " << m.cost << ", runner-up " << m.second << ")";
      throw Error(os.str());
    }
    if (jump) ++res.basis_jumps;
    const double p = 0.5 * (a + b);
    if (m.offset > 0)
      for (int j = -m.offset; j < 0; ++j) res.crossings.push_back({p, +1, j - cum});
    if (m.offset < 0)
      for (int j = 0; j < -m.offset; ++j) res.crossings.push_back({p, -1, j - cum});
    cum += m.offset;
  }
};

}  // namespace

FlowResult spectral_flow(const SpectrumFn& spec, double a, double b, const FlowOptions& opt) {
  if (opt.nodes < 2) throw Error("spectral flow: need at least two nodes");
  std::vector<double> s(opt.nodes);
  for (int i = 0; i < opt.nodes; ++i) s[i] = a + (b - a) * i / (opt.nodes - 1);
  std::vector<RVec> L(opt.nodes);
  parallel_for(opt.nodes, opt.jobs, [&](int i) { L[i] = spec(s[i]); });
  FlowRun run{spec, opt, {}, 0, std::abs(b - a)};
  run.res.evaluations = opt.nodes;
  run.log(s[0], L[0]);
  for (int i = 0; i + 1 < opt.nodes; ++i) {
    run.step(s[i], L[i], s[i + 1], L[i + 1], 0);
    run.log(s[i + 1], L[i + 1]);
  }
  run.res.sf = run.cum;
  int sum = 0;
  for (const auto& c : run.res.crossings) sum += c.direction;
  if (sum != run.res.sf) throw Error("spectral flow: crossing bookkeeping mismatch");
  return run.res;
}

json SquareResult::to_json() const {
  return {{"bottom", bottom}, {"right", right}, {"top", top}, {"left", left}, {"loop", loop()}};
}

SquareResult sf_square(const std::function<RVec(double, double)>& spec, double t0, double t1, double s0, double s1,
                       const FlowOptions& opt) {
  SquareResult r;
  r.bottom = spectral_flow([&](double s) { return spec(t0, s); }, s0, s1, opt).sf;
  r.top = spectral_flow([&](double s) { return spec(t1, s); }, s0, s1, opt).sf;
  r.left = spectral_flow([&](double t) { return spec(t, s0); }, t0, t1, opt).sf;
  r.right = spectral_flow([&](double t) { return spec(t, s1); }, t0, t1, opt).sf;
  return r;
}

double dist_to_int(double x) { return std::abs(x - std::round(x)); }

json XiIdentity::to_json() const {
  return {{"xi0", xi0}, {"xi1", xi1},           {"sf", sf},   {"analytic", analytic}, {"lhs", lhs},
          {"residual", residual}, {"mod1_residual", mod1}, {"eta_error", error}};
}

XiIdentity xi_difference_identity(const EtaEstimate& e0, const EtaEstimate& e1, int sf, double analytic) {
  if (!e0.converged || !e1.converged) throw Error("xi identity: eta estimate did not converge");
  XiIdentity r;
  r.xi0 = e0.xi;
  r.xi1 = e1.xi;
  r.sf = sf;
  r.analytic = analytic;
  r.lhs = r.xi1 - r.xi0 - sf;
  r.residual = std::abs(r.lhs - analytic);
  r.mod1 = dist_to_int(r.lhs - analytic);
  r.error = 0.5 * (e0.error + e1.error);
  return r;
}

void write_branches_csv(const std::string& path, const std::vector<BranchPoint>& pts) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << "param,branch,value\n" << std::setprecision(17);
  for (const auto& p : pts) f << p.param << ',' << p.branch << ',' << p.value << '\n';
}

}  // namespace sg
