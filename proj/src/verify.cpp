#include "sg/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace sg {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T, class Conv>
T convert(const std::string& key, const std::string& v, Conv conv) {
  try {
    size_t pos = 0;
    T x = conv(v, &pos);
    if (trim(v.substr(pos)).empty()) return x;
  } catch (const std::exception&) {
  }
  throw Error("config: bad value for " + key + ": '" + v + "'");
}

int to_int(const std::string& key, const std::string& v) {
  return convert<int>(key, v, [](const std::string& s, size_t* p) { return std::stoi(s, p); });
}
double to_double(const std::string& key, const std::string& v) {
  return convert<double>(key, v, [](const std::string& s, size_t* p) { return std::stod(s, p); });
}

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
};

json finite_or_string(double x) { return std::isfinite(x) ? json(x) : json(std::isnan(x) ? "nan" : "inf"); }

// Principal logarithm of a unitary, i.e. i*H with H Hermitian, |spec H| <= pi.
Mat log_unitary(const Mat& W) {
  Eigen::ComplexEigenSolver<Mat> es(W);
  Mat V = es.eigenvectors();
  CVec l = es.eigenvalues();
  for (Eigen::Index i = 0; i < l.size(); ++i) l[i] = cplx(0.0, std::arg(l[i]));
  return V * l.asDiagonal() * V.inverse();
}

// u_s = U exp(s log(U^{-1} V)) taken blockwise in the grading so that every
// u_s stays block-scalar on the Clifford factor.
std::function<Mat(double)> block_geodesic(const ModelBoundary& model, const Mat& U, const Mat& V) {
  const int k = model.half();
  const Mat W = U.adjoint() * V;
  Mat Lg = Mat::Zero(model.dim(), model.dim());
  Lg.topLeftCorner(k, k) = log_unitary(W.topLeftCorner(k, k));
  Lg.bottomRightCorner(k, k) = log_unitary(W.bottomRightCorner(k, k));
  const Mat H = hermitian_part(Mat(-kI * Lg));
  return [U, H](double s) { return Mat(U * expi_hermitian(s * H)); };
}

// (m, n) of the i-th seeded model; m <= 4, n <= 2.
std::pair<int, int> model_shape(int i) {
  static const std::pair<int, int> shapes[] = {{2, 1}, {4, 1}, {2, 2}, {2, 1}, {4, 1}};
  return shapes[i % 5];
}

Mat scalar_winding_at(double x, int w) { return Mat::Constant(1, 1, std::exp(cplx(0.0, kTwoPi * w * x))); }

// W(x,y) exp(iH(x,y)) with W = diag(e^{2 pi i (a x + b y)}, 1).
std::function<Mat(const std::vector<double>&)> torus_unitary(int n, uint64_t seed, double scale) {
  auto H = random_trig_hermitian(n, 2, 1, scale, seed);
  const int a = static_cast<int>(seed % 3) - 1, b = static_cast<int>((seed / 3) % 3) - 1;
  return [H, a, b, n](const std::vector<double>& x) {
    Mat W = Mat::Identity(n, n);
    W(0, 0) = std::exp(cplx(0.0, kTwoPi * (a * x[0] + b * x[1])));
    return Mat(W * expi_hermitian(H(x)));
  };
}

FlowOptions flow_options(const SuiteConfig& cfg, const std::string& sec) {
  FlowOptions fo;
  fo.jobs = cfg.jobs;
  fo.nodes = cfg.get_int(sec + ".sf_nodes", fo.nodes);
  fo.locate_tol = cfg.get_double(sec + ".sf_locate_tol", fo.locate_tol);
  fo.max_depth = cfg.get_int(sec + ".sf_max_depth", fo.max_depth);
  return fo;
}

Refinement make_trend(std::string quantity, std::string grid, std::vector<double> gv, std::vector<double> res) {
  Refinement r{std::move(quantity), std::move(grid), std::move(gv), std::move(res), true, {}};
  for (size_t i = 1; i < r.residuals.size(); ++i)
    if (!(r.residuals[i] <= r.residuals[i - 1])) r.monotone = false;
  return r;
}

}  // namespace

// ---------------------------------------------------------------- config

SuiteConfig SuiteConfig::parse(const std::string& text) {
  SuiteConfig c;
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) throw Error("config line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (key.empty()) throw Error("config line " + std::to_string(lineno) + ": empty key");
    c.kv_[section.empty() ? key : section + "." + key] = val;
  }
  if (c.has("run.seed")) {
    const std::string& v = c.kv_.at("run.seed");
    try {
      size_t pos = 0;
      c.seed = std::stoull(v, &pos);
      if (pos != v.size()) throw Error("");
    } catch (...) {
      throw Error("config: bad value for run.seed: '" + v + "'");
    }
  }
  c.jobs = c.get_int("run.jobs", c.jobs);
  c.tolerance_scale = c.get_double("run.tolerance_scale", c.tolerance_scale);
  c.suite = c.get_string("run.suite", c.suite);
  if (c.jobs < 1) throw Error("config: run.jobs must be >= 1");
  if (!(c.tolerance_scale > 0)) throw Error("config: run.tolerance_scale must be positive");
  for (const auto& [k, v] : c.kv_) {
    const auto dot = k.rfind('.');
    const std::string leaf = dot == std::string::npos ? k : k.substr(dot + 1);
    if (leaf.rfind("tol_", 0) == 0 && !(to_double(k, v) > 0)) throw Error("config: tolerance " + k + " must be positive");
  }
  return c;
}

SuiteConfig SuiteConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("config: cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

int SuiteConfig::get_int(const std::string& key, int def) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? def : to_int(key, it->second);
}

double SuiteConfig::get_double(const std::string& key, double def) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? def : to_double(key, it->second);
}

std::string SuiteConfig::get_string(const std::string& key, const std::string& def) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? def : it->second;
}

std::vector<int> SuiteConfig::get_ints(const std::string& key, const std::vector<int>& def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  std::vector<int> out;
  for (const auto& s : split_list(it->second)) out.push_back(to_int(key, s));
  if (out.empty()) throw Error("config: empty list for " + key);
  return out;
}

std::vector<double> SuiteConfig::get_doubles(const std::string& key, const std::vector<double>& def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  std::vector<double> out;
  for (const auto& s : split_list(it->second)) out.push_back(to_double(key, s));
  if (out.empty()) throw Error("config: empty list for " + key);
  return out;
}

double SuiteConfig::tol(const std::string& section, const std::string& name, double def) const {
  const double t = get_double(section + ".tol_" + name, def) * tolerance_scale;
  if (!(t > 0)) throw Error("config: tolerance " + section + ".tol_" + name + " must be positive");
  return t;
}

json SuiteConfig::to_json() const {
  json j = json::object();
  for (const auto& [k, v] : kv_) j[k] = v;
  return {{"suite", suite}, {"seed", seed}, {"jobs", jobs}, {"tolerance_scale", tolerance_scale}, {"entries", j}};
}

// ---------------------------------------------------------------- reports

Check& SuiteReport::add(std::string name, double residual, double tolerance, std::string note, json detail) {
  Check c;
  c.name = std::move(name);
  c.residual = residual;
  c.tolerance = tolerance;
  c.pass = std::isfinite(residual) && residual < tolerance;
  c.note = std::move(note);
  c.detail = std::move(detail);
  checks.push_back(std::move(c));
  return checks.back();
}

Check& SuiteReport::add_exact(std::string name, long value, std::string note, json detail) {
  Check c;
  c.name = std::move(name);
  c.residual = static_cast<double>(std::labs(value));
  c.tolerance = 0;
  c.pass = value == 0;
  c.note = std::move(note);
  c.detail = std::move(detail);
  checks.push_back(std::move(c));
  return checks.back();
}

void SuiteReport::add_refinement(Refinement r) { refinements.push_back(std::move(r)); }

bool SuiteReport::pass() const {
  if (checks.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::vector<std::string> SuiteReport::failures() const {
  std::vector<std::string> f;
  for (const auto& c : checks)
    if (!c.pass) f.push_back(suite + "/" + c.name);
  return f;
}

json SuiteReport::to_json() const {
  json cs = json::array();
  for (const auto& c : checks) {
    json j = {{"name", c.name},
              {"residual", finite_or_string(c.residual)},
              {"tolerance", c.tolerance},
              {"pass", c.pass}};
    if (!c.note.empty()) j["note"] = c.note;
    if (!c.detail.is_null()) j["detail"] = c.detail;
    cs.push_back(std::move(j));
  }
  json rs = json::array();
  for (const auto& r : refinements) {
    json res = json::array();
    for (double x : r.residuals) res.push_back(finite_or_string(x));
    json j = {{"quantity", r.quantity}, {"grid", r.grid}, {"grid_values", r.grid_values},
              {"residuals", res},       {"monotone", r.monotone}};
    if (!r.rationale.empty()) j["rationale"] = r.rationale;
    rs.push_back(std::move(j));
  }
  return {{"schema", kReportSchema}, {"suite", suite},    {"seed", seed},          {"pass", pass()},
          {"checks", cs},            {"refinement", rs}, {"provenance", provenance}};
}

void write_residuals_csv(const std::string& path, const std::vector<SuiteReport>& reports) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << "suite,check,residual,tolerance,pass\n" << std::setprecision(17);
  for (const auto& r : reports)
    for (const auto& c : r.checks)
      f << r.suite << ',' << c.name << ',' << c.residual << ',' << c.tolerance << ',' << (c.pass ? 1 : 0) << '\n';
}

void validate_report_json(const json& j) {
  for (const char* k : {"schema", "suite", "seed", "pass", "checks", "refinement", "provenance"})
    if (!j.contains(k)) throw Error(std::string("report: missing field '") + k + "'");
  if (j.at("schema") != kReportSchema) throw Error("report: unknown schema " + j.at("schema").dump());
  bool all = !j.at("checks").empty();
  for (const auto& c : j.at("checks")) {
    for (const char* k : {"name", "residual", "tolerance", "pass"})
      if (!c.contains(k)) throw Error(std::string("report: check missing field '") + k + "'");
    all = all && c.at("pass").get<bool>();
  }
  if (all != j.at("pass").get<bool>()) throw Error("report: overall pass flag disagrees with checks");
}

json merge_reports(const std::vector<json>& reports) {
  json suites = json::array();
  bool all = !reports.empty();
  for (const auto& r : reports) {
    if (r.contains("suites")) {
      for (const auto& s : r.at("suites")) {
        validate_report_json(s);
        all = all && s.at("pass").get<bool>();
        suites.push_back(s);
      }
      continue;
    }
    validate_report_json(r);
    all = all && r.at("pass").get<bool>();
    suites.push_back(r);
  }
  return {{"schema", kReportSchema}, {"pass", all}, {"suites", suites}};
}

// ---------------------------------------------------------------- forms

SuiteReport verify_forms(const SuiteConfig& cfg) {
  SuiteReport rep;
  rep.suite = "forms";
  rep.seed = cfg.seed;
  const std::string S = "forms";
  const double eps = cfg.get_double(S + ".eps_flat", 0.02);
  const int n_theta = cfg.get_int(S + ".n_theta", 512);
  const int k_max = cfg.get_int(S + ".k_max", 5);
  const int base = cfg.get_int(S + ".base_points", 32);
  const int t2 = cfg.get_int(S + ".t2_points", 16);
  const int cup_points = cfg.get_int(S + ".cup_points", 8);
  const int push_theta = cfg.get_int(S + ".t2_n_theta", 256);
  const int push_points = cfg.get_int(S + ".t2_pushforward_points", 32);
  const int tr_n_s = cfg.get_int(S + ".transgression_n_s", 129);
  const int cup_seeds = cfg.get_int(S + ".cup_seeds", 20);
  const int t2_unitaries = cfg.get_int(S + ".t2_unitaries", 5);
  const int path_seeds = cfg.get_int(S + ".path_seeds", 3);
  const int n_s = cfg.get_int(S + ".n_s", 33);
  const int path_theta = cfg.get_int(S + ".path_n_theta", 256);
  const auto windings = cfg.get_ints(S + ".windings", {-2, -1, 0, 1, 2});
  rep.provenance = {{"config", cfg.to_json()}, {"eps_flat", eps}, {"n_theta", n_theta}, {"base_points", base},
                    {"t2_points", t2}, {"n_s", n_s}, {"path_n_theta", path_theta}, {"cup_points", cup_points},
                    {"t2_n_theta", push_theta}, {"t2_pushforward_points", push_points}, {"transgression_n_s", tr_n_s}};
  if (n_s < 5 || n_s % 2 == 0) throw Error("config: forms.n_s must be odd and >= 5");
  if (tr_n_s < 5) throw Error("config: forms.transgression_n_s must be >= 5");

  Stopwatch sw;
  const auto prof = make_bump_profile(n_theta, eps);
  const double tol_lemma = cfg.tol(S, "lemma", 1e-10);
  for (int k = 1; k <= k_max; ++k) {
    const double v = lemma_id_integral(prof, k), ex = lemma_id_closed_form(k);
    rep.add("lemma_integral[k=" + std::to_string(k) + "]", std::abs(v - ex), tol_lemma, {},
            {{"value", v}, {"expected", ex}});
  }
  rep.runtimes["lemma"] = sw.seconds();

  // cup product and loop unitary on S^1 and T^2
  sw = {};
  const double tol_cup = cfg.tol(S, "cup", 1e-10), tol_loop = cfg.tol(S, "loop", 1e-10);
  double worst_e = 0, worst_herm = 0, worst_conj = 0, worst_unit = 0, worst_end = 0;
  for (int i = 0; i < 2 * cup_seeds; ++i) {
    const bool torus = i >= cup_seeds;
    const uint64_t sd = cfg.seed * 1000 + 17 + i;
    GridFunction U =
        torus ? GridFunction::sample({cup_points, cup_points}, 2, torus_unitary(2, sd, 0.8), false)
              : GridFunction::sample({cup_points}, 2,
                                     [H = random_trig_hermitian(2, 1, 2, 1.0, sd)](const std::vector<double>& x) {
                                       return expi_hermitian(H(x));
                                     },
                                     false);
    GridFunction e = cup_with_bott(U, prof);
    GridFunction L = loop_unitary(U, prof);
    Mat E0 = Mat::Zero(4, 4);
    E0.topLeftCorner(2, 2).setIdentity();
    GridFunction conj = L * GridFunction::constant(e.dims(), E0) * adjoint(L);
    worst_e = std::max(worst_e, (e * e - e).sup_norm());
    worst_herm = std::max(worst_herm, (e - adjoint(e)).sup_norm());
    worst_conj = std::max(worst_conj, (e - conj).sup_norm());
    worst_unit = std::max(worst_unit, unitarity_defect(L));
    // theta = 0 slice: e = diag(I, 0) and the loop unitary is diag(I, -I)
    Mat J = Mat::Identity(4, 4);
    J.bottomRightCorner(2, 2) *= -1.0;
    const size_t slice = e.points() / static_cast<size_t>(e.dims()[0]);
    for (size_t p = 0; p < slice; ++p) {
      worst_end = std::max(worst_end, max_abs(e.at(p) - E0));
      worst_end = std::max(worst_end, max_abs(L.at(p) - J));
    }
  }
  json cup_detail = {{"unitaries_per_base", cup_seeds}, {"bases", {"S1", "T2"}}};
  rep.add("cup_idempotent", worst_e, tol_cup, {}, cup_detail);
  rep.add("cup_selfadjoint", worst_herm, tol_cup);
  rep.add("cup_endpoint", worst_end, tol_cup);
  rep.add("loop_conjugation", worst_conj, tol_loop);
  rep.add("loop_unitarity", worst_unit, tol_loop);
  rep.runtimes["cup"] = sw.seconds();

  // pushforward of Ch(e_U) against Ch(U), and integrality
  sw = {};
  const double tol_push = cfg.tol(S, "pushforward", 1e-8), tol_quant = cfg.tol(S, "quantization", 1e-8);
  for (int w : windings) {
    auto U = GridFunction::sample({base}, 1, [w](const std::vector<double>& x) { return scalar_winding_at(x[0], w); });
    auto e = cup_with_bott(U, prof);
    auto che = chern_even(e);
    auto chu = chern_odd(U);
    const double r = (pushforward_circle(che) + chu).sup_norm();
    const double integral = integrate(che).real();
    const std::string tag = "[S1,w=" + std::to_string(w) + "]";
    rep.add("pushforward" + tag, r, tol_push);
    rep.add("chern_integral" + tag, std::abs(integral + w), tol_quant, {},
            {{"integral", integral}, {"winding", w}, {"integral_ChU", integrate(chu).real()}});
  }
  rep.runtimes["windings"] = sw.seconds();
  for (int i = 0; i < t2_unitaries; ++i) {
    const uint64_t sd = cfg.seed * 1000 + 501 + i;
    auto U = GridFunction::sample({push_points, push_points}, 2, torus_unitary(2, sd, 0.5), false);
    auto che = chern_even(cup_with_bott(U, make_bump_profile(push_theta, eps)));
    auto chu = chern_odd(U);
    const double r = (pushforward_circle(che) + chu).sup_norm();
    rep.add("pushforward[T2,seed=" + std::to_string(sd) + "]", r, tol_push, {}, {{"scale", chu.sup_norm()}});
  }
  rep.runtimes["pushforward"] = sw.seconds();

  // transgression along seeded paths on T^2
  sw = {};
  const double tol_path = cfg.tol(S, "path", 1e-6), tol_tr = cfg.tol(S, "transgression", 1e-6);
  const auto pprof = make_bump_profile(path_theta, eps);
  for (int i = 0; i < path_seeds; ++i) {
    const uint64_t sd = cfg.seed * 1000 + 701 + 2 * i;
    auto T0 = random_trig_hermitian(1, 2, 1, 0.5, sd), T1 = random_trig_hermitian(1, 2, 1, 0.5, sd + 1);
    UnitaryPath path;
    for (int j = 0; j < n_s; ++j) {
      const double s = static_cast<double>(j) / (n_s - 1);
      path.nodes.push_back(GridFunction::sample(
          {t2, t2}, 1, [&](const std::vector<double>& x) { return expi_hermitian(T0(x) + s * T1(x)); }, false));
    }
    auto sec = secondary_chern_odd(path);
    auto tu = tch(sec);
    auto te = tch(secondary_chern_even(cup_path(path, pprof)));
    const std::string tag = "[seed=" + std::to_string(sd) + "]";
    rep.add("path_pushforward" + tag, (pushforward_circle(te) - tu).sup_norm(), tol_path, {},
            {{"scale", tu.sup_norm()}});
    // d/ds Ch(U_s) = d(secondary) at the midpoint, 5-point stencil on a finer s-grid
    UnitaryPath fine;
    for (int j = 0; j < tr_n_s; ++j) {
      const double s = static_cast<double>(j) / (tr_n_s - 1);
      fine.nodes.push_back(GridFunction::sample(
          {push_points, push_points}, 1, [&](const std::vector<double>& x) { return expi_hermitian(T0(x) + s * T1(x)); }, false));
    }
    const auto fsec = secondary_chern_odd(fine);
    const int c = tr_n_s / 2;
    const double h = fine.h();
    const double wts[5] = {1, -8, 0, 8, -1};
    DifferentialForm dch(fine.nodes[0].dims(), 1);
    for (int q = 0; q < 5; ++q) dch += cplx(wts[q] / (12 * h)) * chern_odd(fine.nodes[c - 2 + q]);
    const double tr = (dch - d_exterior(contract_ds(fsec[c]))).sup_norm();
    rep.add("transgression" + tag, tr, tol_tr, "fourth-order s-differences", {{"scale", dch.sup_norm()}});
  }
  // constant path: every secondary integral vanishes
  {
    UnitaryPath path;
    for (int j = 0; j < n_s; ++j) path.nodes.push_back(GridFunction::identity({t2, t2}, 1));
    const double a = tch(secondary_chern_odd(path)).sup_norm();
    const double b = pushforward_circle(tch(secondary_chern_even(cup_path(path, pprof)))).sup_norm();
    rep.add("identity_path", std::max(a, b), tol_path);
  }
  rep.runtimes["paths"] = sw.seconds();
  return rep;
}

// ---------------------------------------------------------------- eta oracle

EtaEstimate shifted_circle_eta(double b, int K) { return eta(eigenvalues(build_shifted_circle(b, K))); }

SuiteReport verify_eta_oracle(const SuiteConfig& cfg) {
  SuiteReport rep;
  rep.suite = "eta-oracle";
  rep.seed = cfg.seed;
  const int K = cfg.get_int("eta_oracle.cutoff", 2000);
  const auto bs = cfg.get_doubles("eta_oracle.b", {0.1, 0.25, 0.4, 0.6, 0.9});
  const double tol = cfg.tol("eta_oracle", "eta", 1e-3);
  rep.provenance = {{"config", cfg.to_json()}, {"cutoff", K}, {"operator", "i d/dtheta + 2 pi b"}};
  Stopwatch sw;
  for (double b : bs) {
    if (!(b > 0 && b < 1)) throw Error("config: eta_oracle.b values must lie in (0,1)");
    const auto e = shifted_circle_eta(b, K);
    std::ostringstream name;
    name << "eta[b=" << b << "]";
    rep.add(name.str(), std::abs(e.value - (1 - 2 * b)), tol, {},
            {{"estimate", e.value}, {"expected", 1 - 2 * b}, {"error", finite_or_string(e.error)}});
  }
  rep.runtimes["eta"] = sw.seconds();
  return rep;
}

// ---------------------------------------------------------------- theorem (xi-difference form)

namespace {

// Projection path p_s = u_s p0 u_s^*, u_s = exp(2 pi i s amp H(theta)) on the circle.
void theorem_circle(const SuiteConfig& cfg, SuiteReport& rep) {
  const std::string S = "theorem1";
  const int seeds = cfg.get_int(S + ".seeds", 3);
  const int n_theta = cfg.get_int(S + ".n_theta", 128);
  const auto ladder = cfg.get_ints(S + ".circle_n_s", {33, 65, 129});
  const double amp = cfg.get_double(S + ".amplitude", 0.3);
  const int K = cfg.get_int(S + ".circle_cutoff", 48);
  const double tol = cfg.tol(S, "circle", 1e-3);
  const FlowOptions fo = flow_options(cfg, S);
  for (int ns : ladder)
    if (ns < 5 || ns % 2 == 0) throw Error("config: theorem1.circle_n_s entries must be odd and >= 5");
  rep.provenance["circle"] = {{"n_theta", n_theta}, {"n_s_ladder", ladder}, {"amplitude", amp}, {"cutoff", K},
                              {"operator", "-i d/dtheta on C^2, compressed by p_s"}};
  Mat p0 = Mat::Zero(2, 2);
  p0(0, 0) = 1;
  const auto D = build_circle_derivative(K, 2, -1);
  for (int i = 0; i < seeds; ++i) {
    Stopwatch sw;
    const uint64_t sd = cfg.seed + static_cast<uint64_t>(i);
    const auto H = random_trig_hermitian(2, 1, 1, 1.0, sd);
    auto ps = [&](double s, double th) {
      const Mat u = expi_hermitian(kTwoPi * s * amp * H({th}));
      return Mat(u * p0 * u.adjoint());
    };
    auto build = [&](double s) { return compress(D, [&](double th) { return ps(s, th); }); };
    const std::string tag = "[seed=" + std::to_string(sd) + "]";
    try {
      const auto e0 = eta(eigenvalues(build(0.0))), e1 = eta(eigenvalues(build(1.0)));
      const auto fl = spectral_flow(spectrum_fn(build), 0.0, 1.0, fo);
      if (i == 0) rep.branches = fl.branches;
      std::vector<double> res;
      for (size_t c = 0; c < ladder.size(); ++c) {
        const int n_s = ladder[c];
        ProjectionPath path;
        for (int j = 0; j < n_s; ++j) {
          const double s = static_cast<double>(j) / (n_s - 1);
          path.nodes.push_back(
              GridFunction::sample({n_theta}, 2, [&](const std::vector<double>& x) { return ps(s, x[0]); }));
        }
        const double rhs = integrate(tch(secondary_chern_even(path))).real();
        const auto x = xi_difference_identity(e0, e1, fl.sf, rhs);
        res.push_back(x.residual);
        if (c + 1 == ladder.size()) {
          json row = x.to_json();
          row["n_s"] = n_s;
          row["cutoff"] = K;
          row["flow"] = fl.to_json();
          row["flow"].erase("branches");
          rep.add("xi_identity" + tag, x.residual, tol, {}, row);
        }
      }
      auto tr = make_trend("xi_identity" + tag, "n_s", std::vector<double>(ladder.begin(), ladder.end()), res);
      if (!tr.monotone) tr.rationale = "residual below the eta extrapolation error";
      rep.add_refinement(tr);
    } catch (const Error& e) {
      rep.add("xi_identity" + tag, std::numeric_limits<double>::infinity(), tol, e.what());
    }
    rep.runtimes["circle" + tag] = sw.seconds();
  }
  // constant path: both sides vanish
  {
    const auto H = random_trig_hermitian(2, 1, 1, 1.0, cfg.seed);
    auto p = [&](double th) {
      const Mat u = expi_hermitian(kTwoPi * amp * H({th}));
      return Mat(u * p0 * u.adjoint());
    };
    ProjectionPath path;
    for (int j = 0; j < ladder.back(); ++j)
      path.nodes.push_back(GridFunction::sample({n_theta}, 2, [&](const std::vector<double>& x) { return p(x[0]); }));
    const double rhs = integrate(tch(secondary_chern_even(path))).real();
    const auto e = eta(eigenvalues(compress(D, p)));
    const auto x = xi_difference_identity(e, e, 0, rhs);
    rep.add("constant_path", std::max(std::abs(x.lhs), std::abs(rhs)), tol, {}, x.to_json());
  }
}

// Half path U_s = I + (e^{2 pi i s} - 1) P(x,y), s in [0, s_max], on the torus
// boundary model; the interval operator with the P_{pi/4} condition is the
// circle operator compressed by e_{U_s}.
void theorem_torus(const SuiteConfig& cfg, SuiteReport& rep) {
  const std::string S = "theorem1";
  const auto cutoffs = cfg.get_ints(S + ".t2_cutoffs", {2, 3});
  // interval modes grow with the boundary cutoff so both resolve the same energies
  const int modes_per = cfg.get_int(S + ".t2_modes_per_cutoff", 2);
  const int grid = cfg.get_int(S + ".t2_grid", 32);
  const int n_s = cfg.get_int(S + ".n_s", 33);
  const double smax = cfg.get_double(S + ".t2_s_max", 0.5);
  const double eps = cfg.get_double(S + ".eps_flat", 0.02);
  const double tol = cfg.tol(S, "t2", 5e-2);
  FlowOptions fo = flow_options(cfg, S);
  fo.nodes = cfg.get_int(S + ".t2_sf_nodes", 9);
  fo.locate_tol = cfg.get_double(S + ".t2_sf_locate_tol", 1e-4);
  const int n = 2;
  auto Pf = [](double x, double y) {
    CVec v(2);
    v << std::cos(kTwoPi * x), std::exp(cplx(0.0, kTwoPi * y)) * std::sin(kTwoPi * x);
    return Mat(v * v.adjoint());
  };
  auto Uf = [&](double s, double x, double y) {
    return Mat(Mat::Identity(2, 2) + (std::exp(cplx(0.0, kTwoPi * s)) - 1.0) * Pf(x, y));
  };
  rep.provenance["t2"] = {{"cutoffs", cutoffs}, {"interval_modes_per_cutoff", modes_per}, {"form_grid", grid}, {"n_s", n_s},
                          {"s_max", smax}, {"eps_flat", eps}, {"projection", "v v*, v = (cos 2pi x, e^{2pi i y} sin 2pi x)"}};
  Stopwatch sw;
  UnitaryPath path;
  for (int j = 0; j < n_s; ++j) {
    const double s = smax * j / (n_s - 1);
    path.nodes.push_back(
        GridFunction::sample({grid, grid}, n, [&](const std::vector<double>& x) { return Uf(s, x[0], x[1]); }));
  }
  // the path is parametrized on [0, s_max]; the s-integral is invariant under rescaling
  const double rhs = integrate(tch(secondary_chern_odd(path))).real();
  rep.runtimes["t2.forms"] = sw.seconds();
  const auto prof = make_bump_profile(256, eps);
  std::vector<double> res;
  json rows = json::array();
  for (size_t c = 0; c < cutoffs.size(); ++c) {
    sw = {};
    const int nc = cutoffs[c];
    const int K = modes_per * nc;
    const auto model = torus2_boundary_model(nc, n);
    const Mat Z = Mat::Zero(model.dim(), model.dim());
    auto op = [&](double s) {
      const Mat u = torus2_unitary(nc, n, [&](double x, double y) { return Uf(s, x, y); });
      return build_interval_dirac(model, u, prof, 1.0, build_Pt(Z, u, kPi / 4), K);
    };
    const auto e0 = eta(eigenvalues(op(0.0))), e1 = eta(eigenvalues(op(smax)));
    const auto fl = spectral_flow(spectrum_fn(op), 0.0, smax, fo);
    const auto x = xi_difference_identity(e0, e1, fl.sf, rhs);
    json row = x.to_json();
    row["cutoff"] = nc;
    row["interval_modes"] = K;
    row["dimension"] = op(0.0).size();
    row["flow"] = fl.to_json();
    row["flow"].erase("branches");
    rows.push_back(row);
    res.push_back(x.residual);
    rep.runtimes["t2[cutoff=" + std::to_string(nc) + "]"] = sw.seconds();
    if (c + 1 == cutoffs.size()) rep.add("t2_xi_identity[cutoff=" + std::to_string(nc) + "]", x.residual, tol, {}, row);
  }
  auto tr = make_trend("t2_xi_identity", "fourier_cutoff", std::vector<double>(cutoffs.begin(), cutoffs.end()), res);
  if (!tr.monotone) tr.rationale = "residual not decreasing over the cutoff ladder";
  rep.add_refinement(tr);
  rep.provenance["t2"]["table"] = rows;
}

}  // namespace

SuiteReport verify_theorem_main(const SuiteConfig& cfg, const std::string& instance) {
  SuiteReport rep;
  rep.suite = "theorem1/" + instance;
  rep.seed = cfg.seed;
  rep.provenance["config"] = cfg.to_json();
  try {
    if (instance == "circle") {
      theorem_circle(cfg, rep);
    } else if (instance == "t2") {
      theorem_torus(cfg, rep);
    } else {
      throw Error("unknown instance '" + instance + "' (expected circle or t2)");
    }
  } catch (const Error& e) {
    rep.add("numerical_failure", std::numeric_limits<double>::infinity(), 0, e.what());
  }
  return rep;
}

// ---------------------------------------------------------------- eta along P_t

SuiteReport verify_prop_path(const SuiteConfig& cfg) {
  SuiteReport rep;
  rep.suite = "prop-path";
  rep.seed = cfg.seed;
  const std::string S = "prop_path";
  const int models = cfg.get_int(S + ".models", 5);
  const int K = cfg.get_int(S + ".modes", 32);
  const int t_points = cfg.get_int(S + ".t_points", 8);
  const double eps = cfg.get_double(S + ".eps_flat", 0.02);
  const double scale = cfg.get_double(S + ".unitary_scale", 1.0);
  const double tol = cfg.tol(S, "eta", 5e-3), tol_trivial = cfg.tol(S, "commuting", 1e-6);
  const double tol_id = cfg.tol(S, "identity", 1e-10);
  FlowOptions fo = flow_options(cfg, S);
  fo.nodes = cfg.get_int(S + ".sf_nodes", 5);
  if (t_points < 2) throw Error("config: prop_path.t_points must be >= 2");
  std::vector<double> tg(t_points);
  for (int i = 0; i < t_points; ++i) tg[i] = (kPi / 4) * i / (t_points - 1);
  const auto prof = make_bump_profile(256, eps);
  rep.provenance = {{"config", cfg.to_json()}, {"modes", K}, {"t_grid", tg}, {"eps_flat", eps}};

  // eta(t) + dim ker(t) - 2 SF(t_0 -> t) is constant when eta only jumps at crossings
  auto deviation = [&](const ModelBoundary& model, const Mat& u, json& detail) {
    auto op = [&](double t) { return build_interval_dirac(model, u, prof, 1.0, build_Pt(model, u, t), K); };
    std::vector<double> corrected;
    json rows = json::array();
    int sf = 0;
    double err = 0;
    for (int i = 0; i < t_points; ++i) {
      if (i > 0) sf += spectral_flow(spectrum_fn(op), tg[i - 1], tg[i], fo).sf;
      const auto e = eta(eigenvalues(op(tg[i])));
      if (!e.converged) throw Error("eta estimate did not converge at t = " + std::to_string(tg[i]));
      err = std::max(err, e.error);
      corrected.push_back(e.value + e.kernel_dim - 2.0 * sf);
      rows.push_back({{"t", tg[i]}, {"eta", e.value}, {"kernel", e.kernel_dim}, {"sf_from_start", sf}, {"error", e.error}});
    }
    detail = {{"grid", rows}, {"eta_error", err}};
    const auto [lo, hi] = std::minmax_element(corrected.begin(), corrected.end());
    return *hi - *lo;
  };

  for (int i = 0; i < models; ++i) {
    Stopwatch sw;
    const auto [m, nn] = model_shape(i);
    const uint64_t sd = cfg.seed * 100 + static_cast<uint64_t>(i);
    const std::string tag = "[seed=" + std::to_string(sd) + ",m=" + std::to_string(m) + ",n=" + std::to_string(nn) + "]";
    try {
      const auto model = random_model(m, nn, sd);
      const Mat u = random_block_unitary(model, scale, sd + 100);
      json detail;
      const double dev = deviation(model, u, detail);
      rep.add("eta_deviation" + tag, dev, tol, {}, detail);
      const auto mu = mu_symmetry_check(model, u, tg);
      rep.add("proof_identities" + tag, mu.worst(), tol_id, {}, mu.to_json());
    } catch (const Error& e) {
      rep.add("eta_deviation" + tag, std::numeric_limits<double>::infinity(), tol, e.what());
    }
    rep.runtimes["model" + tag] = sw.seconds();
  }
  // u commuting with A: the family is unitarily equivalent to the u = I one
  {
    const auto model = random_model(2, 1, cfg.seed * 100 + 99);
    const Mat u = expi_hermitian(Mat(0.7 * model.A * model.A));
    json detail;
    try {
      rep.add("eta_deviation[commuting]", deviation(model, u, detail), tol_trivial, {}, detail);
    } catch (const Error& e) {
      rep.add("eta_deviation[commuting]", std::numeric_limits<double>::infinity(), tol_trivial, e.what());
    }
  }
  return rep;
}

// ---------------------------------------------------------------- interval invariant vs circle

json DaiZhangEta::to_json() const {
  return {{"xi_interval", xi_interval}, {"sf", sf}, {"value", value}, {"error", finite_or_string(error)},
          {"converged", converged}, {"flow_evaluations", flow.evaluations}};
}

DaiZhangEta dai_zhang_eta(const ModelBoundary& model, const Mat& u, const BumpProfile& prof, int K,
                          const FlowOptions& fo) {
  const auto P0 = build_Pt(model, u, 0.0);
  DaiZhangEta r;
  const auto e = eta(eigenvalues(build_interval_dirac(model, u, prof, 1.0, P0, K)));
  r.xi_interval = e.xi;
  r.error = 0.5 * e.error;
  r.converged = e.converged;
  r.flow = spectral_flow(spectrum_fn([&](double t) { return build_interval_dirac(model, u, prof, t, P0, K); }), 0.0,
                         1.0, fo);
  r.sf = r.flow.sf;
  r.value = r.xi_interval - r.sf;
  return r;
}

SuiteReport verify_thm_eta(const SuiteConfig& cfg) {
  SuiteReport rep;
  rep.suite = "eta-equivalence";
  rep.seed = cfg.seed;
  const std::string S = "eta_equivalence";
  const int models = cfg.get_int(S + ".models", 5);
  const int K = cfg.get_int(S + ".modes", 32);
  const double eps = cfg.get_double(S + ".eps_flat", 0.02);
  const double eps2 = cfg.get_double(S + ".eps_flat_alt", 0.05);
  const double scale = cfg.get_double(S + ".unitary_scale", 1.0);
  const double tol = cfg.tol(S, "mod1", 1e-2), tol_full = cfg.tol(S, "full", 1e-2);
  const double tol_psi = cfg.tol(S, "psi", 2e-3);
  const FlowOptions fo = flow_options(cfg, S);
  rep.provenance = {{"config", cfg.to_json()}, {"modes", K}, {"eps_flat", {eps, eps2}}};
  const auto prof = make_bump_profile(256, eps), prof2 = make_bump_profile(256, eps2);

  auto run = [&](const ModelBoundary& model, const Mat& u, const std::string& tag, bool psi_check) {
    const auto circ = eta(eigenvalues(build_compressed_circle(model, u, eps, K)));
    if (!circ.converged) throw Error("circle eta estimate did not converge");
    const auto dz = dai_zhang_eta(model, u, prof, K, fo);
    if (!dz.converged) throw Error("interval eta estimate did not converge");
    const auto sfP = spectral_flow(
        spectrum_fn([&](double t) { return build_interval_dirac(model, u, prof, 1.0, build_Pt(model, u, t), K); }),
        0.0, kPi / 4, fo);
    const double mod1 = dist_to_int(dz.value - circ.xi);
    // xi(e_u D e_u) - SF(P_t) - SF(D(t)) against the interval invariant
    const double full = dz.value - (circ.xi - sfP.sf - dz.sf);
    json detail = {{"circle_xi", circ.xi}, {"circle_eta_error", circ.error}, {"interval", dz.to_json()},
                   {"sf_boundary_path", sfP.sf}, {"full_difference", full}, {"integer", std::lround(full)}};
    rep.add("mod1" + tag, mod1, tol, {}, detail);
    rep.add("full_identity" + tag, dist_to_int(full), tol_full, {}, {{"value", full}, {"integer", std::lround(full)}});
    if (psi_check) {
      const auto dz2 = dai_zhang_eta(model, u, prof2, K, fo);
      rep.add("psi_independence" + tag, std::abs(dz2.value - dz.value), tol_psi, {},
              {{"value", dz.value}, {"value_alt", dz2.value}});
    }
  };

  for (int i = 0; i < models; ++i) {
    Stopwatch sw;
    const auto [m, nn] = model_shape(i);
    const uint64_t sd = cfg.seed * 100 + 50 + static_cast<uint64_t>(i);
    const std::string tag = "[seed=" + std::to_string(sd) + ",m=" + std::to_string(m) + ",n=" + std::to_string(nn) + "]";
    try {
      const auto model = random_model(m, nn, sd);
      run(model, random_block_unitary(model, scale, sd + 100), tag, true);
    } catch (const Error& e) {
      rep.add("mod1" + tag, std::numeric_limits<double>::infinity(), tol, e.what());
    }
    rep.runtimes["model" + tag] = sw.seconds();
  }
  try {
    const auto model = random_model(2, 1, cfg.seed * 100 + 98);
    run(model, Mat::Identity(model.dim(), model.dim()), "[u=I]", false);
  } catch (const Error& e) {
    rep.add("mod1[u=I]", std::numeric_limits<double>::infinity(), tol, e.what());
  }
  return rep;
}

// ---------------------------------------------------------------- homotopy squares

SuiteReport verify_sf_squares(const SuiteConfig& cfg) {
  SuiteReport rep;
  rep.suite = "sf-squares";
  rep.seed = cfg.seed;
  const std::string S = "sf_squares";
  const int squares = cfg.get_int(S + ".squares", 3);
  const int K = cfg.get_int(S + ".modes", 24);
  const double eps = cfg.get_double(S + ".eps_flat", 0.02);
  const double scale = cfg.get_double(S + ".unitary_scale", 2.0);
  const FlowOptions fo = flow_options(cfg, S);
  const auto prof = make_bump_profile(256, eps);
  rep.provenance = {{"config", cfg.to_json()}, {"modes", K}, {"eps_flat", eps}, {"unitary_scale", scale},
                    {"path", "u_s = U exp(s log(U^{-1} V)), blockwise"}};
  json table = json::array();
  for (int i = 0; i < squares; ++i) {
    Stopwatch sw;
    const auto [m, nn] = model_shape(i);
    const uint64_t sd = cfg.seed * 100 + 80 + static_cast<uint64_t>(i);
    const std::string tag = "[seed=" + std::to_string(sd) + "]";
    try {
      const auto model = random_model(m, nn, sd);
      const Mat U = random_block_unitary(model, scale, sd + 100), V = random_block_unitary(model, scale, sd + 200);
      const auto us = block_geodesic(model, U, V);
      // (t, s): boundary condition P_t^{u_s}, t in [0, pi/4]
      const auto sq3 = sf_square(
          [&](double t, double s) {
            const Mat u = us(s);
            return eigenvalues_only(build_interval_dirac(model, u, prof, 1.0, build_Pt(model, u, t), K));
          },
          0.0, kPi / 4, 0.0, 1.0, fo);
      // (t, s): interpolation parameter of the operator, condition P_0^{u_s}
      const auto sq4 = sf_square(
          [&](double t, double s) {
            const Mat u = us(s);
            return eigenvalues_only(build_interval_dirac(model, u, prof, t, build_Pt(model, u, 0.0), K));
          },
          0.0, 1.0, 0.0, 1.0, fo);
      const auto top = spectral_flow(
          [&](double s) { return eigenvalues_only(build_compressed_circle(model, us(s), eps, K)); }, 0.0, 1.0, fo);
      rep.add_exact("square_boundary_path" + tag, sq3.loop(), {}, sq3.to_json());
      rep.add_exact("square_operator_path" + tag, sq4.loop(), {}, sq4.to_json());
      rep.add_exact("circle_top_edge" + tag, top.sf - sq3.top, "compressed circle family against the pi/4 edge",
                    {{"circle", top.sf}, {"interval", sq3.top}});
      table.push_back({{"seed", sd}, {"boundary_path", sq3.to_json()}, {"operator_path", sq4.to_json()}, {"circle_top", top.sf}});
    } catch (const Error& e) {
      rep.add("square_boundary_path" + tag, std::numeric_limits<double>::infinity(), 0, e.what());
    }
    rep.runtimes["square" + tag] = sw.seconds();
  }
  // U = V: every edge of the squares is zero
  {
    const auto model = random_model(2, 1, cfg.seed * 100 + 97);
    const Mat U = random_block_unitary(model, scale, cfg.seed * 100 + 197);
    const auto sq = sf_square(
        [&](double t, double) {
          return eigenvalues_only(build_interval_dirac(model, U, prof, 1.0, build_Pt(model, U, t), K));
        },
        0.0, kPi / 4, 0.0, 1.0, fo);
    rep.add_exact("constant_path_edges", std::abs(sq.bottom) + std::abs(sq.top) + std::abs(sq.loop()), {},
                  sq.to_json());
  }
  rep.provenance["squares"] = table;
  return rep;
}

// ---------------------------------------------------------------- conjugation

SuiteReport verify_conjugation(const SuiteConfig& cfg) {
  SuiteReport rep;
  rep.suite = "conjugation";
  rep.seed = cfg.seed;
  const std::string S = "conjugation";
  const auto ladder = cfg.get_ints(S + ".n_theta", {64, 128, 256});
  const double eps = cfg.get_double(S + ".eps_flat", 0.02);
  const double tol = cfg.tol(S, "residual", 1e-6), tol_id = cfg.tol(S, "identity", 1e-10);
  const double min_ratio = cfg.get_double(S + ".min_ratio", 10.0);
  rep.provenance = {{"config", cfg.to_json()}, {"eps_flat", eps}, {"ladder", ladder}};
  const auto model = random_model(2, 1, cfg.seed);
  const Mat u = random_block_unitary(model, 1.0, cfg.seed + 100);
  Stopwatch sw;
  std::vector<double> res;
  json rows = json::array();
  for (int N : ladder) {
    const auto r = conjugation_check(model, u, eps, N);
    res.push_back(r.residual);
    rows.push_back({{"n_theta", N}, {"residual", r.residual}, {"max_entry", r.max_entry}, {"dim", r.dim}});
  }
  rep.add("residual[n_theta=" + std::to_string(ladder.back()) + "]", res.back(), tol, {}, rows);
  // fine/coarse residual ratio must be at most 1/min_ratio
  const double ratio = res.back() / res.front();
  rep.add("refinement_ratio", ratio, 1.0 / min_ratio, {}, {{"coarse", res.front()}, {"fine", res.back()}});
  rep.add_refinement(make_trend("conjugation_residual", "n_theta", std::vector<double>(ladder.begin(), ladder.end()), res));
  const auto id = conjugation_check(model, Mat::Identity(2, 2), eps, ladder.back());
  rep.add("identity_unitary", id.residual, tol_id);
  const auto mu = mu_symmetry_check(model, u, {0.0, 0.2, 0.5, kPi / 4});
  rep.add("mu_identities", mu.worst(), tol_id, {}, mu.to_json());
  rep.runtimes["conjugation"] = sw.seconds();
  return rep;
}

}  // namespace sg
