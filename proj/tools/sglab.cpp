// sglab: runs the verification suites and writes report.json, residuals.csv,
// branches.csv and manifest.json into the output directory.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sg/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "sglab 1.0.0";

struct Globals {
  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string out = "out";
  int jobs = 1;
  double tolerance_scale = 0;
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw sg::Error("cannot write " + p.string());
  f << text;
}

std::string read_text(const std::string& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw sg::Error("cannot read " + p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

sg::SuiteConfig resolve(const Globals& g) {
  sg::SuiteConfig cfg = g.config_path.empty() ? sg::SuiteConfig{} : sg::SuiteConfig::load(g.config_path);
  if (g.seed_set) cfg.seed = g.seed;
  if (g.jobs > 0) cfg.jobs = g.jobs;
  if (g.tolerance_scale > 0) cfg.tolerance_scale = g.tolerance_scale;
  return cfg;
}

fs::path out_dir(const Globals& g, bool flag_given) {
  // the only environment override: the output directory
  if (!flag_given)
    if (const char* env = std::getenv("SGLAB_OUT"); env && *env) return env;
  return g.out;
}

int emit(const std::vector<sg::SuiteReport>& reports, const sg::SuiteConfig& cfg, const fs::path& dir,
         const std::vector<std::string>& argv) {
  fs::create_directories(dir);
  std::vector<json> js;
  for (const auto& r : reports) js.push_back(r.to_json());
  const json merged = js.size() == 1 ? js.front() : sg::merge_reports(js);
  write_text(dir / "report.json", merged.dump(2) + "\n");
  sg::write_residuals_csv((dir / "residuals.csv").string(), reports);
  std::vector<sg::BranchPoint> br;
  for (const auto& r : reports) br.insert(br.end(), r.branches.begin(), r.branches.end());
  if (!br.empty()) sg::write_branches_csv((dir / "branches.csv").string(), br);

  json runtimes = json::object();
  for (const auto& r : reports)
    for (const auto& [k, v] : r.runtimes) runtimes[r.suite][k] = v;
  json manifest = {{"tool", kVersion},  {"timestamp", timestamp()}, {"argv", argv},
                   {"seed", cfg.seed},  {"config", cfg.to_json()},  {"output_dir", dir.string()},
                   {"runtimes_s", runtimes}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");

  bool ok = true;
  for (const auto& r : reports) {
    for (const auto& c : r.checks)
      std::cout << (c.pass ? "PASS " : "FAIL ") << r.suite << "/" << c.name << "  residual=" << std::setprecision(3)
                << c.residual << " tol=" << c.tolerance << "\n";
    for (const auto& t : r.refinements)
      if (!t.monotone) std::cout << "NOTE " << r.suite << "/" << t.quantity << ": refinement trend not monotone\n";
    ok = ok && r.pass();
  }
  if (!ok) {
    std::cerr << "failing checks:";
    for (const auto& r : reports)
      for (const auto& f : r.failures()) std::cerr << " " << f;
    std::cerr << "\n";
  }
  std::cout << (ok ? "all checks passed" : "checks failed") << "; report in " << (dir / "report.json").string() << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"Spectral-flow and secondary-character verification suites"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Config file (sectioned key = value text)")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", g.seed, "Model seed");
  auto* out_opt = app.add_option("--out", g.out, "Output directory (default out, or $SGLAB_OUT)");
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--tolerance-scale", g.tolerance_scale, "Multiplier applied to every tolerance")
      ->check(CLI::PositiveNumber);
  g.jobs = 0;

  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->require_subcommand(1);
  auto* v_forms = verify->add_subcommand("forms", "Cut-off functions, cup product and character identities");
  auto* v_thm = verify->add_subcommand("theorem1", "xi-difference identity along a path");
  std::string instance = "circle";
  v_thm->add_option("--instance", instance, "circle or t2")->check(CLI::IsMember({"circle", "t2"}));
  auto* v_prop = verify->add_subcommand("prop-path", "eta along the boundary-condition path");
  auto* v_eta = verify->add_subcommand("eta-equivalence", "Interval invariant against the compressed circle");
  auto* v_sq = verify->add_subcommand("sf-squares", "Spectral flow around homotopy squares");
  auto* v_conj = verify->add_subcommand("conjugation", "Conjugation identity and symmetry checks");

  auto* oracle = app.add_subcommand("eta-oracle", "eta of the shifted circle operator");
  double b = 0.25;
  int oracle_cutoff = 2000;
  oracle->add_option("--b", b, "Shift in (0,1)")->check(CLI::Range(0.0, 1.0));
  oracle->add_option("--cutoff", oracle_cutoff, "Fourier cutoff")->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "Refinement ladder for one quantity");
  std::string target = "conjugation";
  std::vector<int> ladder;
  sweep->add_option("--target", target, "conjugation, eta-oracle, theorem1 or t2")
      ->check(CLI::IsMember({"conjugation", "eta-oracle", "theorem1", "t2"}));
  sweep->add_option("--ladder", ladder,
                    "Grid sizes, coarse to fine (n_theta, Fourier cutoff, circle path nodes n_s, or T2 cutoff)")->required()->delimiter(',');

  auto* report = app.add_subcommand("report", "Merge JSON reports");
  std::vector<std::string> inputs;
  report->add_option("inputs", inputs, "report.json files")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  g.seed_set = seed_opt->count() > 0;
  const fs::path dir = out_dir(g, out_opt->count() > 0);

  try {
    sg::SuiteConfig cfg = resolve(g);
    if (*verify) {
      std::vector<sg::SuiteReport> reps;
      if (*v_forms) reps.push_back(sg::verify_forms(cfg));
      if (*v_thm) reps.push_back(sg::verify_theorem_main(cfg, instance));
      if (*v_prop) reps.push_back(sg::verify_prop_path(cfg));
      if (*v_eta) reps.push_back(sg::verify_thm_eta(cfg));
      if (*v_sq) reps.push_back(sg::verify_sf_squares(cfg));
      if (*v_conj) reps.push_back(sg::verify_conjugation(cfg));
      return emit(reps, cfg, dir, args);
    }
    if (*oracle) {
      if (!(b > 0 && b < 1)) throw sg::Error("--b must lie strictly between 0 and 1");
      const auto e = sg::shifted_circle_eta(b, oracle_cutoff);
      const double tol = 1e-3 * cfg.tolerance_scale;
      const bool ok = e.converged && std::abs(e.value - (1 - 2 * b)) < tol;
      std::cout << std::setprecision(10) << "eta(D_b) b=" << b << " estimate " << e.value << " +- " << e.error
                << " expected " << 1 - 2 * b << (ok ? " PASS" : " FAIL") << "\n";
      return ok ? 0 : 1;
    }
    if (*sweep) {
      std::ostringstream lad;
      for (size_t i = 0; i < ladder.size(); ++i) lad << (i ? "," : "") << ladder[i];
      sg::SuiteReport rep;
      if (target == "conjugation") {
        cfg.set("conjugation.n_theta", lad.str());
        rep = sg::verify_conjugation(cfg);
      } else if (target == "eta-oracle") {
        sg::SuiteReport acc;
        acc.suite = "sweep/eta-oracle";
        acc.seed = cfg.seed;
        std::vector<double> gv, res;
        for (int K : ladder) {
          cfg.set("eta_oracle.cutoff", std::to_string(K));
          auto r = sg::verify_eta_oracle(cfg);
          double worst = 0;
          for (auto& c : r.checks) {
            c.name += "[cutoff=" + std::to_string(K) + "]";
            worst = std::max(worst, c.residual);
            acc.checks.push_back(c);
          }
          gv.push_back(K);
          res.push_back(worst);
        }
        sg::Refinement t{"eta_oracle_worst", "fourier_cutoff", gv, res, true, {}};
        for (size_t i = 1; i < res.size(); ++i) t.monotone = t.monotone && res[i] <= res[i - 1];
        acc.add_refinement(t);
        rep = acc;
      } else if (target == "theorem1") {
        cfg.set("theorem1.circle_n_s", lad.str());
        rep = sg::verify_theorem_main(cfg, "circle");
      } else {
        cfg.set("theorem1.t2_cutoffs", lad.str());
        rep = sg::verify_theorem_main(cfg, "t2");
      }
      return emit({rep}, cfg, dir, args);
    }
    if (*report) {
      std::vector<json> js;
      for (const auto& p : inputs) js.push_back(json::parse(read_text(p)));
      const json merged = sg::merge_reports(js);
      fs::create_directories(dir);
      write_text(dir / "report.json", merged.dump(2) + "\n");
      const bool ok = merged.at("pass").get<bool>();
      std::cout << "merged " << inputs.size() << " reports: " << (ok ? "all checks passed" : "checks failed") << "\n";
      return ok ? 0 : 1;
    }
  } catch (const sg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
