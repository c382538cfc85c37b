#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "sg/operators.hpp"

namespace sg {

struct SpectrumData {
  RVec values;  // ascending
  int kernel_dim = 0;
  double eps_ker = 0;
  bool kernel_stable = true;  // halving eps_ker leaves kernel_dim unchanged
  double cutoff = std::numeric_limits<double>::infinity();
  nlohmann::json provenance;
};

// eps_ker = eps_rel * max(1, ||H||) unless eps_abs > 0.
SpectrumData eigenvalues(const DiscreteOperator& op, double eps_rel = 1e-8, double eps_abs = 0.0);
SpectrumData eigenvalues(const Mat& H, double eps_rel = 1e-8, double eps_abs = 0.0);
// Sorted eigenvalues only, for flows.
RVec eigenvalues_only(const DiscreteOperator& op);

struct EtaOptions {
  int points = 8;
  double ratio = 2.0;
  double safety = 6.0;       // sqrt(t_min) * cutoff
  double max_spread = 0.05;  // beyond this the estimate is flagged
  int min_count = 16;        // eigenvalues needed inside the cutoff
};

struct EtaEstimate {
  double value = 0;
  double error = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::vector<double> t_grid, partial, tail;
  double fit_lin3 = 0, fit_quad_all = 0, fit_quad5 = 0;
  double fit_sqrt = 0;  // quadratic in sqrt(t); differs from the others when O(sqrt t) terms survive
  int kernel_dim = 0;
  double xi = 0;
  double cutoff = 0;
  nlohmann::json to_json() const;
};

// erfc-regularized partial sums with a Weyl tail, extrapolated to t -> 0.
EtaEstimate eta(const SpectrumData& spec, const EtaOptions& opt = {});

struct Crossing {
  double param = 0;
  int direction = 0;  // +1: branch from < 0 to >= 0 as the parameter increases along the path
  int branch = 0;
};

struct BranchPoint {
  double param = 0;
  int branch = 0;
  double value = 0;
};

struct FlowOptions {
  int nodes = 17;
  int window = 4;          // eigenvalues each side of zero used in the matching
  int max_offset = 3;
  int max_depth = 40;
  double locate_tol = 1e-8;
  bool locate = true;
  double jump_width = 1e-6;  // relative width below which a persistent mismatch is a basis jump
  int jobs = 1;
  // |lambda| < eps_ker counts as zero (hence nonnegative); relative to max|lambda|
  // at the node unless eps_ker_abs > 0
  double eps_ker_rel = 1e-8;
  double eps_ker_abs = 0.0;
};

struct FlowResult {
  int sf = 0;
  std::vector<Crossing> crossings;
  int depth = 0;  // deepest bisection level reached
  int evaluations = 0;
  int basis_jumps = 0;
  std::vector<BranchPoint> branches;
  nlohmann::json to_json() const;
};

using SpectrumFn = std::function<RVec(double)>;
SpectrumFn spectrum_fn(const std::function<DiscreteOperator(double)>& builder);

// Signed count of zero crossings along the parameter path a -> b (either order).
FlowResult spectral_flow(const SpectrumFn& spec, double a, double b, const FlowOptions& opt = {});

struct SquareResult {
  // bottom: s-path at t0; top: s-path at t1; left: t-path at s0; right: t-path at s1
  int bottom = 0, top = 0, left = 0, right = 0;
  int loop() const { return bottom + right - top - left; }
  nlohmann::json to_json() const;
};
SquareResult sf_square(const std::function<RVec(double, double)>& spec, double t0, double t1, double s0, double s1,
                       const FlowOptions& opt = {});

struct XiIdentity {
  double xi0 = 0, xi1 = 0;
  int sf = 0;
  double analytic = 0;
  double lhs = 0, residual = 0, mod1 = 0;
  double error = 0;  // combined eta error bound
  nlohmann::json to_json() const;
};
// lhs = xi1 - xi0 - sf, compared with the analytic side.
XiIdentity xi_difference_identity(const EtaEstimate& e0, const EtaEstimate& e1, int sf, double analytic);

double dist_to_int(double x);

void write_branches_csv(const std::string& path, const std::vector<BranchPoint>& pts);

}  // namespace sg
