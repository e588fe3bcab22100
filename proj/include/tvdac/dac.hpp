#pragma once

#include <vector>

#include "tvdac/cost.hpp"
#include "tvdac/system.hpp"
#include "tvdac/types.hpp"

namespace tvdac {

// Disturbance-feedback control law u_t = sum_{k=1..h} M[k] w_{t-k}, with each
// block constrained to the Frobenius ball of radius kappa_M.
struct DacParams {
  std::vector<MatrixXd> blocks;  // blocks[k-1] = M[k], each m x q
  double kappa_M = 0.0;

  int h() const { return static_cast<int>(blocks.size()); }
  int m() const { return blocks.empty() ? 0 : static_cast<int>(blocks[0].rows()); }
  int q() const { return blocks.empty() ? 0 : static_cast<int>(blocks[0].cols()); }

  // Frobenius norm of the stacked parameter.
  double norm() const;
  double distance(const DacParams& other) const;
  bool feasible(double tol = 0.0) const;

  static DacParams zero(int h, int m, int q, double kappa_M);
};

using DacGradient = std::vector<MatrixXd>;  // same block shape as DacParams

double gradient_norm(const DacGradient& g);

// Recent-first disturbance history: hist[k-1] = w_{t-k}.  Shorter histories
// are treated as zero-padded at the far end.
VectorXd dac_control(const DacParams& M, const std::vector<VectorXd>& w_hist);

// Euclidean projection onto the per-block Frobenius ball (exact, separable).
DacParams project_dac(DacParams M);

// Everything needed to evaluate the truncated cost at one time step:
// an h-block Markov operator (true or estimated), an offset term, and the
// last 2h disturbances (recent first, zero-padded).
struct TruncatedContext {
  MarkovOperator G;
  VectorXd s;                       // offset (natural output or its estimate)
  std::vector<VectorXd> w_hist;     // w_hist[j-1] = w_{t-j}, j = 1..2h

  VectorXd w_lag(int j) const {     // w_{t-j}, zero when beyond history
    if (j <= 0 || j > static_cast<int>(w_hist.size()))
      return VectorXd::Zero(w_hist.empty() ? 0 : w_hist[0].size());
    return w_hist[j - 1];
  }
  void validate(int h) const;
};

// Truncated output sum s + sum_k G[k] u_window[k-1] for explicit past inputs
// u_window[k-1] = u_{t-k}.
VectorXd truncated_output(const TruncatedContext& ctx,
                          const std::vector<VectorXd>& u_window);

// Truncated cost with the window of past policies made explicit:
// M_window[i] = policy at time t - i (i = 0..h).  The past inputs entering
// the truncated output are the controls those policies induce; u_t is the
// current input the cost is charged on.
double truncated_cost(const std::vector<DacParams>& M_window,
                      const TruncatedContext& ctx, const StepCost& cost);

// Same with every window entry fixed to a single M and u_t = u_t(M); this is
// the surrogate the online update differentiates.
double truncated_cost_single(const DacParams& M, const TruncatedContext& ctx,
                             const StepCost& cost);

// Analytic gradient of truncated_cost_single wrt the blocks of M.
DacGradient grad_truncated_cost(const DacParams& M, const TruncatedContext& ctx,
                                const StepCost& cost);

// One projected online-gradient step.
DacParams ogd_step(const DacParams& M, const DacGradient& grad, double eta);

struct OcoConstantsInput {
  double kappa_a = 1.0, kappa_b = 1.0, kappa_w = 1.0, kappa_e = 0.0;
  double kappa_M = 1.0, gamma = 0.5;
  double lip = 1.0;         // cost regularity constant
  double grad_bound = 1.0;  // cost gradient constant
  int h = 1, n = 1, m = 1;
};

// Diameter and regularity constants of the online learning problem, used by
// the theoretical learning-rate rule.
struct OcoConstants {
  double domain_radius = 0.0;   // bound on |y~| and |u|
  double lip_memory = 0.0;      // Lipschitz constant of the windowed cost
  double grad_norm_bound = 0.0; // bound on the surrogate gradient norm
  double diameter = 0.0;        // diameter of the constraint set
};

OcoConstants compute_oco_constants(const OcoConstantsInput& in);

// Learning rate eta = diameter / sqrt(G_f (G_f + L_f h^2) T).
double theoretical_learning_rate(const OcoConstants& c, int h, int T);

// Truncation length h = ceil(log T / log(1/(1-gamma))), at least 1.
int theoretical_history(int T, double gamma);

}  // namespace tvdac
