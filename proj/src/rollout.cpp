#include "tvdac/rollout.hpp"

#include <cmath>
#include <limits>

namespace tvdac {

double EpisodeTrace::total_cost() const {
  double acc = 0.0;
  for (double c : cost) acc += c;
  return acc;
}

std::vector<double> EpisodeTrace::cumulative_cost() const {
  std::vector<double> cum(cost.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cost.size(); ++i) {
    acc += cost[i];
    cum[i] = acc;
  }
  return cum;
}

EpisodeTrace rollout(std::shared_ptr<const SystemPath> sys,
                     std::shared_ptr<const DisturbanceRealization> dist,
                     std::shared_ptr<const CostSpec> costs, Policy& policy,
                     const VectorXd& x1) {
  require(sys && dist && costs, "rollout: null inputs");
  require(dist->T >= sys->T && dist->q == sys->q && dist->p == sys->p,
          "rollout: disturbance shape mismatch");
  require(x1.size() == sys->n, "rollout: x1 dimension mismatch");

  EpisodeTrace tr;
  tr.T = sys->T;
  tr.sys = sys;
  tr.dist = dist;
  tr.costs = costs;
  tr.x1 = x1;
  tr.x.reserve(tr.T);
  tr.y.reserve(tr.T);
  tr.u.reserve(tr.T);
  tr.du.reserve(tr.T);
  tr.cost.reserve(tr.T);
  tr.est_err.reserve(tr.T);
  tr.detection.reserve(tr.T);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  VectorXd x = x1;
  for (int t = 1; t <= tr.T; ++t) {
    const VectorXd y = sys->C_at(t) * x + dist->e_at(t);
    VectorXd u = policy.act(t, y);
    require(u.size() == sys->m, "rollout: policy input dimension mismatch");
    const double c = costs->value(t, y, u);
    policy.feedback(t, StepCost(*costs, t), dist->w_at(t));

    const StepDiagnostics diag = policy.step_diagnostics();
    tr.x.push_back(x);
    tr.y.push_back(y);
    tr.cost.push_back(c);
    tr.du.push_back(diag.du.size() ? diag.du : VectorXd::Zero(sys->m));
    if (diag.M) tr.M.push_back(*diag.M);
    if (diag.G_hat && diag.G_hat->h() >= 1) {
      const MarkovOperator truth = markov_operator(*sys, t, diag.G_hat->h());
      tr.est_err.push_back(diag.G_hat->frobenius_distance(truth));
    } else {
      tr.est_err.push_back(nan);
    }
    tr.detection.push_back(diag.detection ? 1 : 0);
    tr.u.push_back(std::move(u));

    x = sys->A_at(t) * x + sys->B_at(t) * tr.u.back() +
        sys->Bw_at(t) * dist->w_at(t);
  }
  return tr;
}

}  // namespace tvdac
