#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sg/verify.hpp"

using namespace sg;
using nlohmann::json;

namespace {

json read_json(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  return json::parse(f);
}

}  // namespace

TEST_CASE("config parsing") {
  auto c = SuiteConfig::parse(R"(
# global
[run]
seed = 42
jobs = 2
tolerance_scale = 2.5
suite = conjugation

[conjugation]
n_theta = 64, 128 ,256   # ladder
tol_residual = 1e-6
label = a b
)");
  CHECK(c.seed == 42);
  CHECK(c.jobs == 2);
  CHECK(c.tolerance_scale == 2.5);
  CHECK(c.suite == "conjugation");
  CHECK(c.get_ints("conjugation.n_theta", {}) == std::vector<int>{64, 128, 256});
  CHECK(c.get_string("conjugation.label", "") == "a b");
  CHECK(c.tol("conjugation", "residual", 1.0) == doctest::Approx(2.5e-6));
  CHECK(c.tol("conjugation", "other", 1e-3) == doctest::Approx(2.5e-3));
  CHECK(c.get_int("missing.key", 7) == 7);
  CHECK(c.to_json()["entries"]["conjugation.n_theta"] == "64, 128 ,256");
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(SuiteConfig::parse("[run\nseed = 1\n"), Error);
  CHECK_THROWS_AS(SuiteConfig::parse("[run]\nseed 1\n"), Error);
  CHECK_THROWS_AS(SuiteConfig::parse("[run]\nseed = abc\n"), Error);
  CHECK_THROWS_AS(SuiteConfig::parse("[run]\njobs = 0\n"), Error);
  CHECK_THROWS_AS(SuiteConfig::parse("[run]\ntolerance_scale = -1\n"), Error);
  CHECK_THROWS_AS(SuiteConfig::parse("[x]\ntol_y = 0\n"), Error);
  auto c = SuiteConfig::parse("[x]\nn = 3.5\nl = 1, two\n");
  CHECK_THROWS_AS(c.get_int("x.n", 0), Error);
  CHECK_THROWS_AS(c.get_ints("x.l", {}), Error);
  CHECK_THROWS_AS(SuiteConfig::load("/nonexistent/sglab.cfg"), Error);
}

TEST_CASE("report pass logic and JSON layout") {
  SuiteReport r;
  r.suite = "unit";
  r.seed = 3;
  CHECK_FALSE(r.pass());  // an empty report does not pass
  r.add("small", 1e-9, 1e-6);
  r.add_exact("integer", 0);
  CHECK(r.pass());
  r.add("nan", std::nan(""), 1.0);
  CHECK_FALSE(r.pass());
  r.add_exact("off_by_one", -1);
  CHECK(r.failures() == std::vector<std::string>{"unit/nan", "unit/off_by_one"});
  r.add("edge", 1.0, 1.0);  // strict inequality
  CHECK_FALSE(r.checks.back().pass);

  const json j = r.to_json();
  CHECK(j["schema"] == kReportSchema);
  CHECK(j["pass"] == false);
  CHECK(j["checks"].size() == 5);
  CHECK_NOTHROW(validate_report_json(j));
  json bad = j;
  bad["pass"] = true;
  CHECK_THROWS_AS(validate_report_json(bad), Error);
  bad.erase("provenance");
  CHECK_THROWS_AS(validate_report_json(bad), Error);
}

TEST_CASE("merging reports") {
  SuiteReport a, b;
  a.suite = "a";
  b.suite = "b";
  a.add("x", 0, 1);
  b.add("y", 0, 1);
  json m = merge_reports({a.to_json(), b.to_json()});
  CHECK(m["pass"] == true);
  CHECK(m["suites"].size() == 2);
  b.add("z", 2, 1);
  json m2 = merge_reports({m, b.to_json()});
  CHECK(m2["suites"].size() == 3);
  CHECK(m2["pass"] == false);
}

TEST_CASE("residuals csv") {
  SuiteReport r;
  r.suite = "unit";
  r.add("a", 0.5, 1.0);
  const std::string path = "test_verify_residuals.csv";
  write_residuals_csv(path, {r});
  std::ifstream f(path);
  std::string header, row;
  std::getline(f, header);
  std::getline(f, row);
  CHECK(header.find("residual") != std::string::npos);
  CHECK(row.find("unit") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("conjugation suite matches the frozen report") {
  SuiteConfig cfg;
  cfg.seed = 1;
  const json got = verify_conjugation(cfg).to_json();
  const json gold = read_json(SG_GOLDEN_DIR "/conjugation_seed1.json");
  CHECK(got["schema"] == gold["schema"]);
  CHECK(got["pass"] == gold["pass"]);
  REQUIRE(got["checks"].size() == gold["checks"].size());
  for (size_t i = 0; i < got["checks"].size(); ++i) {
    const auto &g = got["checks"][i], o = gold["checks"][i];
    CHECK(g["name"] == o["name"]);
    CHECK(g["pass"] == o["pass"]);
    CHECK(g["tolerance"] == o["tolerance"]);
    const double rg = g["residual"].get<double>(), ro = o["residual"].get<double>();
    // residuals are at rounding level for the fine grids; compare on that scale
    CHECK(std::abs(rg - ro) <= 1e-12 + 1e-6 * std::abs(ro));
  }
}

TEST_CASE("suites are deterministic for a fixed seed") {
  SuiteConfig cfg;
  cfg.seed = 9;
  CHECK(verify_conjugation(cfg).to_json().dump() == verify_conjugation(cfg).to_json().dump());
  cfg.set("eta_oracle.cutoff", "400");
  CHECK(verify_eta_oracle(cfg).to_json().dump() == verify_eta_oracle(cfg).to_json().dump());
}

TEST_CASE("eta oracle suite honours the tolerance scale") {
  SuiteConfig cfg;
  cfg.set("eta_oracle.cutoff", "400");
  cfg.set("eta_oracle.b", "0.25");
  auto r = verify_eta_oracle(cfg);
  REQUIRE(r.checks.size() == 1);
  CHECK(r.checks[0].tolerance == doctest::Approx(1e-3));
  cfg.tolerance_scale = 10;
  CHECK(verify_eta_oracle(cfg).checks[0].tolerance == doctest::Approx(1e-2));
  cfg.set("eta_oracle.b", "1.5");
  CHECK_THROWS_AS(verify_eta_oracle(cfg), Error);
}
