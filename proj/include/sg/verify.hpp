#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sg/spectral.hpp"

namespace sg {

inline constexpr const char* kReportSchema = "sglab.report/1";

// Flat sectioned key-value text:
//   # comment
//   [section]
//   key = value
// Keys are addressed as "section.key". Lists are comma separated.
class SuiteConfig {
 public:
  SuiteConfig() = default;
  static SuiteConfig parse(const std::string& text);
  static SuiteConfig load(const std::string& path);

  std::string suite;
  uint64_t seed = 1;
  int jobs = 1;
  double tolerance_scale = 1.0;

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  int get_int(const std::string& key, int def) const;
  double get_double(const std::string& key, double def) const;
  std::string get_string(const std::string& key, const std::string& def) const;
  std::vector<int> get_ints(const std::string& key, const std::vector<int>& def) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& def) const;
  // Tolerance lookup "section.tol_<name>", scaled; must be positive.
  double tol(const std::string& section, const std::string& name, double def) const;
  const std::map<std::string, std::string>& entries() const { return kv_; }
  nlohmann::json to_json() const;

 private:
  std::map<std::string, std::string> kv_;
};

struct Check {
  std::string name;
  double residual = 0;
  double tolerance = 0;
  bool pass = false;
  std::string note;
  nlohmann::json detail;
};

struct Refinement {
  std::string quantity;
  std::string grid;
  std::vector<double> grid_values;
  std::vector<double> residuals;
  bool monotone = true;  // residuals non-increasing coarse -> fine
  std::string rationale;
};

struct SuiteReport {
  std::string suite;
  uint64_t seed = 0;
  std::vector<Check> checks;
  std::vector<Refinement> refinements;
  std::vector<BranchPoint> branches;
  nlohmann::json provenance;
  std::map<std::string, double> runtimes;  // kept out of to_json so reports stay byte-stable

  Check& add(std::string name, double residual, double tolerance, std::string note = {},
             nlohmann::json detail = nullptr);
  // Exact check (integer identities); residual is |value|.
  Check& add_exact(std::string name, long value, std::string note = {}, nlohmann::json detail = nullptr);
  void add_refinement(Refinement r);
  bool pass() const;
  nlohmann::json to_json() const;
  std::vector<std::string> failures() const;
};

void write_residuals_csv(const std::string& path, const std::vector<SuiteReport>& reports);
nlohmann::json merge_reports(const std::vector<nlohmann::json>& reports);
// Throws if a report lacks required fields.
void validate_report_json(const nlohmann::json& j);

SuiteReport verify_forms(const SuiteConfig& cfg);
SuiteReport verify_eta_oracle(const SuiteConfig& cfg);
// instance: "circle" or "t2"
SuiteReport verify_theorem_main(const SuiteConfig& cfg, const std::string& instance);
SuiteReport verify_prop_path(const SuiteConfig& cfg);
SuiteReport verify_thm_eta(const SuiteConfig& cfg);
SuiteReport verify_sf_squares(const SuiteConfig& cfg);
SuiteReport verify_conjugation(const SuiteConfig& cfg);

struct DaiZhangEta {
  double xi_interval = 0;  // xi(D^{psi,u}; P_0)
  int sf = 0;              // SF(D^{psi,u}(t); P_0), t: 0 -> 1
  double value = 0;        // xi_interval - sf
  double error = 0;
  bool converged = false;
  FlowResult flow;
  nlohmann::json to_json() const;
};
DaiZhangEta dai_zhang_eta(const ModelBoundary& model, const Mat& u, const BumpProfile& prof, int K,
                          const FlowOptions& fo = {});

// eta estimate of the scalar shifted circle operator.
EtaEstimate shifted_circle_eta(double b, int K);

}  // namespace sg
