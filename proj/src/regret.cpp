#include "tvdac/regret.hpp"

#include <cmath>

#include "tvdac/rng.hpp"

namespace tvdac {

namespace {

VectorXd dac_input_at(const DacParams& M, const DisturbanceRealization& dist,
                      int t) {
  VectorXd u = VectorXd::Zero(M.m());
  for (int j = 1; j <= M.h(); ++j) {
    if (t - j >= 1) u.noalias() += M.blocks[j - 1] * dist.w[t - j - 1];
  }
  return u;
}

}  // namespace

std::vector<double> counterfactual_rollout(const DacParams& M,
                                           const SystemPath& sys,
                                           const DisturbanceRealization& dist,
                                           const CostSpec& costs,
                                           const VectorXd& x1) {
  require(M.m() == sys.m && M.q() == sys.q,
          "counterfactual: parameter shape mismatch");
  require(x1.size() == sys.n, "counterfactual: x1 dimension mismatch");
  require(dist.T >= sys.T, "counterfactual: disturbance too short");
  std::vector<double> out;
  out.reserve(sys.T);
  VectorXd x = x1;
  for (int t = 1; t <= sys.T; ++t) {
    const VectorXd y = sys.C_at(t) * x + dist.e_at(t);
    const VectorXd u = dac_input_at(M, dist, t);
    out.push_back(costs.value(t, y, u));
    x = sys.A_at(t) * x + sys.B_at(t) * u + sys.Bw_at(t) * dist.w_at(t);
  }
  return out;
}

double comparator_objective(const DacParams& M, const SystemPath& sys,
                            const DisturbanceRealization& dist,
                            const CostSpec& costs, const VectorXd& x1,
                            DacGradient* grad) {
  require(M.m() == sys.m && M.q() == sys.q,
          "comparator objective: parameter shape mismatch");
  const int T = sys.T;
  std::vector<VectorXd> ys(T), us(T);
  double J = 0.0;
  VectorXd x = x1;
  for (int t = 1; t <= T; ++t) {
    ys[t - 1] = sys.C_at(t) * x + dist.e_at(t);
    us[t - 1] = dac_input_at(M, dist, t);
    J += costs.value(t, ys[t - 1], us[t - 1]);
    x = sys.A_at(t) * x + sys.B_at(t) * us[t - 1] +
        sys.Bw_at(t) * dist.w_at(t);
  }
  if (!grad) return J;

  // Adjoint pass: lambda_t = A_t' lambda_{t+1} + C_t' dc/dy_t, and the
  // total derivative wrt u_t is dc/du_t + B_t' lambda_{t+1}.  Chain through
  // u_t = sum_j M[j] w_{t-j}.
  grad->assign(M.h(), MatrixXd::Zero(M.m(), M.q()));
  VectorXd lambda = VectorXd::Zero(sys.n);
  VectorXd gy, gu;
  for (int t = T; t >= 1; --t) {
    costs.grad(t, ys[t - 1], us[t - 1], gy, gu);
    const VectorXd du_total = gu + sys.B_at(t).transpose() * lambda;
    for (int j = 1; j <= M.h(); ++j) {
      if (t - j >= 1)
        (*grad)[j - 1].noalias() +=
            du_total * dist.w[t - j - 1].transpose();
    }
    lambda = sys.A_at(t).transpose() * lambda + sys.C_at(t).transpose() * gy;
  }
  return J;
}

namespace {

// Projected-gradient stationarity: at interior blocks the gradient itself;
// at boundary blocks the gradient minus its outward-pointing radial part.
double stationarity(const DacParams& M, const DacGradient& g) {
  double acc = 0.0;
  for (int k = 0; k < M.h(); ++k) {
    const double bn = M.blocks[k].norm();
    MatrixXd pg = g[k];
    if (bn >= M.kappa_M - 1e-12 && bn > 0.0) {
      const MatrixXd normal = M.blocks[k] / bn;
      const double radial = (g[k].array() * normal.array()).sum();
      if (radial < 0.0) pg -= radial * normal;
    }
    acc += pg.squaredNorm();
  }
  return std::sqrt(acc);
}

VectorXd vec_blocks(const std::vector<MatrixXd>& blocks) {
  int d = 0;
  for (const auto& b : blocks) d += static_cast<int>(b.size());
  VectorXd v(d);
  int off = 0;
  for (const auto& b : blocks) {
    v.segment(off, b.size()) =
        Eigen::Map<const VectorXd>(b.data(), b.size());
    off += static_cast<int>(b.size());
  }
  return v;
}

void unvec_blocks(const VectorXd& v, std::vector<MatrixXd>& blocks) {
  int off = 0;
  for (auto& b : blocks) {
    b = Eigen::Map<const MatrixXd>(v.data() + off, b.rows(), b.cols());
    off += static_cast<int>(b.size());
  }
}

// Every step cost is a quadratic form, so the hindsight objective is a convex
// quadratic in the stacked parameter: grad(v) = H v + b with H PSD.  Probe
// the exact adjoint gradient at the origin and at the unit basis points to
// recover H and b, minimize in closed form, and use the projected minimizer
// as the iterative solver's first start (with a 1/L step hint).  The solver
// still certifies stationarity, so this only moves work, not semantics.
struct QuadraticWarmStart {
  bool ok = false;
  DacParams start;
  double alpha0 = 1.0;
};

QuadraticWarmStart quadratic_warm_start(const SystemPath& sys,
                                        const DisturbanceRealization& dist,
                                        const CostSpec& costs,
                                        const VectorXd& x1, int h,
                                        double kappa_M) {
  QuadraticWarmStart ws;
  const int d = h * sys.m * sys.q;
  if (d > 256) return ws;  // probing would cost more than it saves
  DacParams probe = DacParams::zero(h, sys.m, sys.q, kappa_M);
  DacGradient g;
  comparator_objective(probe, sys, dist, costs, x1, &g);
  const VectorXd b = vec_blocks(g);
  MatrixXd H(d, d);
  VectorXd e = VectorXd::Zero(d);
  for (int i = 0; i < d; ++i) {
    e(i) = 1.0;
    unvec_blocks(e, probe.blocks);
    comparator_objective(probe, sys, dist, costs, x1, &g);
    H.col(i) = vec_blocks(g) - b;
    e(i) = 0.0;
  }
  H = 0.5 * (H + H.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(H);
  if (es.info() != Eigen::Success) return ws;
  const VectorXd& ev = es.eigenvalues();
  const double lmax = ev(d - 1);
  ws.start = DacParams::zero(h, sys.m, sys.q, kappa_M);
  if (lmax > 0.0) {
    // Splitting iteration for the ball-constrained quadratic: the plain
    // projected minimizer is a poor start when control is cheap (the
    // unconstrained optimum lies far outside the ball and the remaining
    // constrained problem is ill-conditioned).  The quadratic subproblem
    // reuses the eigendecomposition, so iterations cost O(d^2).
    double lmin_pos = lmax;
    for (int i = 0; i < d; ++i)
      if (ev(i) > 1e-10 * lmax) {
        lmin_pos = ev(i);
        break;
      }
    const double rho = std::sqrt(lmax * std::max(lmin_pos, 1e-8 * lmax));
    VectorXd winv(d);
    for (int i = 0; i < d; ++i)
      winv(i) = 1.0 / (std::max(ev(i), 0.0) + rho);
    const MatrixXd& Q = es.eigenvectors();
    auto solve_shifted = [&](const VectorXd& rhs) -> VectorXd {
      return Q * (winv.asDiagonal() * (Q.transpose() * rhs));
    };
    DacParams proj_tmp = DacParams::zero(h, sys.m, sys.q, kappa_M);
    VectorXd z = VectorXd::Zero(d), u = VectorXd::Zero(d), v(d);
    for (int it = 0; it < 400; ++it) {
      v = solve_shifted(rho * (z - u) - b);
      unvec_blocks(v + u, proj_tmp.blocks);
      proj_tmp = project_dac(std::move(proj_tmp));
      const VectorXd z_new = vec_blocks(proj_tmp.blocks);
      const double dz = (z_new - z).norm();
      z = z_new;
      u += v - z;
      if (dz < 1e-12 * (1.0 + z.norm()) && (v - z).norm() < 1e-10) break;
    }
    unvec_blocks(z, ws.start.blocks);
    ws.start = project_dac(std::move(ws.start));
    ws.alpha0 = 1.0 / lmax;
  }
  ws.ok = true;
  return ws;
}

struct StartResult {
  DacParams M;
  double objective = 0.0;
  double pg_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

StartResult solve_from(DacParams M, const SystemPath& sys,
                       const DisturbanceRealization& dist,
                       const CostSpec& costs, const VectorXd& x1,
                       const ComparatorOptions& opts, double alpha0) {
  StartResult res;
  DacGradient g;
  double J = comparator_objective(M, sys, dist, costs, x1, &g);
  double alpha = alpha0;
  int iter = 0;
  double pg = stationarity(M, g);
  while (pg >= opts.tol && iter < opts.max_iters) {
    // Backtracking on the proximal sufficient-decrease condition.
    bool accepted = false;
    while (alpha > 1e-18) {
      DacParams trial = M;
      for (int k = 0; k < M.h(); ++k) trial.blocks[k] -= alpha * g[k];
      trial = project_dac(std::move(trial));
      double lin = 0.0, dist2 = 0.0;
      for (int k = 0; k < M.h(); ++k) {
        const MatrixXd d = trial.blocks[k] - M.blocks[k];
        lin += (g[k].array() * d.array()).sum();
        dist2 += d.squaredNorm();
      }
      DacGradient g_trial;
      const double J_trial =
          comparator_objective(trial, sys, dist, costs, x1, &g_trial);
      if (J_trial <= J + lin + dist2 / (2.0 * alpha) + 1e-12 * std::abs(J)) {
        M = std::move(trial);
        J = J_trial;
        g = std::move(g_trial);
        alpha *= 1.5;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    ++iter;
    if (!accepted) break;  // line search stalled at machine precision
    pg = stationarity(M, g);
  }
  res.M = std::move(M);
  res.objective = J;
  res.pg_norm = pg;
  res.iterations = iter;
  res.converged = pg < opts.tol;
  return res;
}

}  // namespace

ComparatorResult best_dac_in_hindsight(const SystemPath& sys,
                                       const DisturbanceRealization& dist,
                                       const CostSpec& costs, int h,
                                       double kappa_M,
                                       const ComparatorOptions& opts,
                                       const VectorXd* x1_in) {
  require(h >= 1, "comparator: h must be positive");
  require(kappa_M >= 0.0, "comparator: kappa_M must be nonnegative");
  const VectorXd x1 = x1_in ? *x1_in : VectorXd::Zero(sys.n);

  Rng rng(mix_seed(opts.seed, stream::kComparator));
  const QuadraticWarmStart ws =
      quadratic_warm_start(sys, dist, costs, x1, h, kappa_M);
  std::vector<StartResult> results;
  int total_iters = 0;
  for (int s = 0; s < std::max(1, opts.num_starts); ++s) {
    DacParams start = DacParams::zero(h, sys.m, sys.q, kappa_M);
    double alpha0 = 1.0;
    if (s == 0 && ws.ok) {
      start = ws.start;
      alpha0 = ws.alpha0;
    } else if (s > 0) {
      for (auto& b : start.blocks)
        b = rng.normal_matrix(sys.m, sys.q, kappa_M);
      start = project_dac(std::move(start));
    }
    StartResult r =
        solve_from(std::move(start), sys, dist, costs, x1, opts, alpha0);
    total_iters += r.iterations;
    results.push_back(std::move(r));
    // The objective is convex, so one certified stationary point is the
    // global minimum; extra starts only hedge against line-search stalls.
    if (results.back().converged) break;
  }

  // Best objective; ties go to the smaller parameter norm.
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    const double ji = results[i].objective, jb = results[best].objective;
    const double tie = 1e-12 * std::max({std::abs(ji), std::abs(jb), 1.0});
    if (ji < jb - tie ||
        (std::abs(ji - jb) <= tie &&
         results[i].M.norm() < results[best].M.norm()))
      best = i;
  }

  ComparatorResult out;
  out.M_star = std::move(results[best].M);
  out.objective = results[best].objective;
  out.pg_norm = results[best].pg_norm;
  out.converged = results[best].converged;
  out.iterations = total_iters;
  out.costs = counterfactual_rollout(out.M_star, sys, dist, costs, x1);
  return out;
}

RegretSeries regret_series(const std::vector<double>& realized_costs,
                           const std::vector<double>& comparator_costs) {
  require(realized_costs.size() == comparator_costs.size(),
          "regret series: length mismatch");
  RegretSeries rs;
  rs.cumulative.reserve(realized_costs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < realized_costs.size(); ++i) {
    acc += realized_costs[i] - comparator_costs[i];
    rs.cumulative.push_back(acc);
  }
  rs.final_regret = rs.cumulative.empty() ? 0.0 : rs.cumulative.back();
  return rs;
}

SlopeFit fit_scaling_exponent(
    const std::vector<std::pair<double, double>>& points) {
  std::vector<std::pair<double, double>> logs;
  for (const auto& [T, v] : points) {
    require(T > 0.0, "scaling fit: horizons must be positive");
    if (v > 0.0) logs.emplace_back(std::log(T), std::log(v));
  }
  if (logs.size() < 2)
    throw InsufficientDataError("scaling fit: need at least two positive points");

  const double n = static_cast<double>(logs.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : logs) {
    sx += x;
    sy += y;
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : logs) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  require(sxx > 0.0, "scaling fit: horizons must be distinct");

  SlopeFit fit;
  fit.points = static_cast<int>(logs.size());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (logs.size() > 2) {
    double rss = 0.0;
    for (const auto& [x, y] : logs) {
      const double r = y - (fit.intercept + fit.slope * x);
      rss += r * r;
    }
    fit.stderr_slope = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return fit;
}

}  // namespace tvdac
