#pragma once

#include <memory>
#include <vector>

#include "tvdac/cost.hpp"
#include "tvdac/dac.hpp"
#include "tvdac/system.hpp"
#include "tvdac/types.hpp"

namespace tvdac {

// What a policy exposes about its internals after each step, for tracing.
struct StepDiagnostics {
  const DacParams* M = nullptr;         // current policy parameter, if any
  const MarkovOperator* G_hat = nullptr;  // current operator estimate, if any
  VectorXd du;                          // exploration component, may be empty
  bool detection = false;               // change declared at this step
};

// Online controller interface.  The closed loop calls, per step t:
//   u_t = act(t, y_t);            // only y_t is revealed before acting
//   feedback(t, cost_t, w_t);     // cost and disturbance arrive afterwards
class Policy {
 public:
  virtual ~Policy() = default;
  virtual VectorXd act(int t, const VectorXd& y) = 0;
  virtual void feedback(int t, const StepCost& cost, const VectorXd& w) = 0;
  virtual StepDiagnostics step_diagnostics() const { return {}; }
};

// Full record of one closed-loop episode.
struct EpisodeTrace {
  int T = 0;
  std::shared_ptr<const SystemPath> sys;
  std::shared_ptr<const DisturbanceRealization> dist;
  std::shared_ptr<const CostSpec> costs;
  VectorXd x1;
  std::vector<VectorXd> x, y, u, du;
  std::vector<double> cost;
  std::vector<DacParams> M;          // empty when the policy has no parameter
  std::vector<double> est_err;       // |G^_t - G_t|_F; NaN when no estimate
  std::vector<uint8_t> detection;

  double total_cost() const;
  std::vector<double> cumulative_cost() const;
};

// Runs the closed loop over the full horizon.  Records estimate errors
// against the true h-block operator whenever the policy exposes an estimate.
EpisodeTrace rollout(std::shared_ptr<const SystemPath> sys,
                     std::shared_ptr<const DisturbanceRealization> dist,
                     std::shared_ptr<const CostSpec> costs, Policy& policy,
                     const VectorXd& x1);

}  // namespace tvdac
