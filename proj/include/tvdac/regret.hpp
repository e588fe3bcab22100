#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tvdac/cost.hpp"
#include "tvdac/dac.hpp"
#include "tvdac/system.hpp"

namespace tvdac {

// Per-step costs of running the fixed parameter M over the whole episode
// (true closed loop, no truncation), started from x1.
std::vector<double> counterfactual_rollout(const DacParams& M,
                                           const SystemPath& sys,
                                           const DisturbanceRealization& dist,
                                           const CostSpec& costs,
                                           const VectorXd& x1);

struct ComparatorOptions {
  double tol = 1e-8;      // stationarity tolerance (projected gradient norm)
  int max_iters = 10000;  // per start
  int num_starts = 5;     // start 1 is the origin, the rest projected random
  std::uint64_t seed = 0; // randomness for the extra starts
};

struct ComparatorResult {
  DacParams M_star;
  std::vector<double> costs;  // per-step costs at M_star
  double objective = 0.0;
  double pg_norm = 0.0;       // stationarity measure at the solution
  int iterations = 0;         // gradient steps spent in total
  bool converged = false;     // pg_norm < tol reached
};

// Best fixed disturbance-feedback parameter in hindsight over the episode:
// minimizes the counterfactual total cost over the per-block Frobenius ball.
// The objective is convex in M (outputs and inputs are affine in M), solved
// by projected gradient descent with a backtracking line search.
ComparatorResult best_dac_in_hindsight(const SystemPath& sys,
                                       const DisturbanceRealization& dist,
                                       const CostSpec& costs, int h,
                                       double kappa_M,
                                       const ComparatorOptions& opts = {},
                                       const VectorXd* x1 = nullptr);

// Objective value and gradient of the counterfactual total cost at M,
// computed in one forward and one adjoint pass (O(T)).
double comparator_objective(const DacParams& M, const SystemPath& sys,
                            const DisturbanceRealization& dist,
                            const CostSpec& costs, const VectorXd& x1,
                            DacGradient* grad = nullptr);

struct RegretSeries {
  std::vector<double> cumulative;  // cumulative realized minus comparator cost
  double final_regret = 0.0;
};

RegretSeries regret_series(const std::vector<double>& realized_costs,
                           const std::vector<double>& comparator_costs);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  int points = 0;
};

// Ordinary least squares of log(value) on log(T).  All values must be
// positive; fewer than two points is an error.
SlopeFit fit_scaling_exponent(
    const std::vector<std::pair<double, double>>& points);

}  // namespace tvdac
