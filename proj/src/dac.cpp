#include "tvdac/dac.hpp"

#include <cmath>

namespace tvdac {

double DacParams::norm() const {
  double acc = 0.0;
  for (const auto& b : blocks) acc += b.squaredNorm();
  return std::sqrt(acc);
}

double DacParams::distance(const DacParams& other) const {
  require(h() == other.h() && m() == other.m() && q() == other.q(),
          "dac distance: shape mismatch");
  double acc = 0.0;
  for (int k = 0; k < h(); ++k)
    acc += (blocks[k] - other.blocks[k]).squaredNorm();
  return std::sqrt(acc);
}

bool DacParams::feasible(double tol) const {
  for (const auto& b : blocks)
    if (b.norm() > kappa_M + tol) return false;
  return true;
}

DacParams DacParams::zero(int h, int m, int q, double kappa_M) {
  require_config(h >= 1 && m >= 1 && q >= 1, "dac params: bad shape");
  require_config(kappa_M >= 0.0, "dac params: kappa_M must be nonnegative");
  DacParams M;
  M.blocks.assign(h, MatrixXd::Zero(m, q));
  M.kappa_M = kappa_M;
  return M;
}

double gradient_norm(const DacGradient& g) {
  double acc = 0.0;
  for (const auto& b : g) acc += b.squaredNorm();
  return std::sqrt(acc);
}

VectorXd dac_control(const DacParams& M, const std::vector<VectorXd>& w_hist) {
  require(M.h() >= 1, "dac_control: empty parameter");
  VectorXd u = VectorXd::Zero(M.m());
  const int avail = static_cast<int>(w_hist.size());
  for (int k = 1; k <= M.h() && k <= avail; ++k) {
    require(w_hist[k - 1].size() == M.q(),
            "dac_control: disturbance dimension mismatch");
    u.noalias() += M.blocks[k - 1] * w_hist[k - 1];
  }
  return u;
}

DacParams project_dac(DacParams M) {
  for (auto& b : M.blocks) {
    const double n = b.norm();
    if (n > M.kappa_M) b *= M.kappa_M / n;
  }
  return M;
}

void TruncatedContext::validate(int h) const {
  require(G.h() == h, "truncated context: operator must have h blocks");
  require(s.size() == G.p(), "truncated context: offset dimension mismatch");
  for (const auto& w : w_hist)
    require(w.size() == w_hist[0].size(),
            "truncated context: ragged disturbance history");
}

VectorXd truncated_output(const TruncatedContext& ctx,
                          const std::vector<VectorXd>& u_window) {
  const int h = ctx.G.h();
  require(static_cast<int>(u_window.size()) >= h,
          "truncated_output: need h past inputs");
  VectorXd y = ctx.s;
  for (int k = 1; k <= h; ++k) {
    require(u_window[k - 1].size() == ctx.G.m(),
            "truncated_output: input dimension mismatch");
    y.noalias() += ctx.G.blocks[k - 1] * u_window[k - 1];
  }
  return y;
}

namespace {

// Control induced at lag `lag` by the policy M: sum_j M[j] w_{t-lag-j}.
VectorXd induced_control(const DacParams& M, const TruncatedContext& ctx,
                         int lag) {
  VectorXd u = VectorXd::Zero(M.m());
  for (int j = 1; j <= M.h(); ++j)
    u.noalias() += M.blocks[j - 1] * ctx.w_lag(lag + j);
  return u;
}

}  // namespace

double truncated_cost(const std::vector<DacParams>& M_window,
                      const TruncatedContext& ctx, const StepCost& cost) {
  const int h = ctx.G.h();
  require(static_cast<int>(M_window.size()) == h + 1,
          "truncated_cost: window must hold h + 1 policies");
  ctx.validate(h);
  std::vector<VectorXd> u_window(h);
  for (int k = 1; k <= h; ++k)
    u_window[k - 1] = induced_control(M_window[k], ctx, k);
  const VectorXd y = truncated_output(ctx, u_window);
  const VectorXd u = induced_control(M_window[0], ctx, 0);
  return cost.value(y, u);
}

double truncated_cost_single(const DacParams& M, const TruncatedContext& ctx,
                             const StepCost& cost) {
  std::vector<DacParams> window(ctx.G.h() + 1, M);
  return truncated_cost(window, ctx, cost);
}

DacGradient grad_truncated_cost(const DacParams& M, const TruncatedContext& ctx,
                                const StepCost& cost) {
  const int h = ctx.G.h();
  require(M.h() == h, "grad_truncated_cost: M and G must share h");
  ctx.validate(h);

  const VectorXd u = induced_control(M, ctx, 0);
  VectorXd y = ctx.s;
  for (int k = 1; k <= h; ++k)
    y.noalias() += ctx.G.blocks[k - 1] * induced_control(M, ctx, k);

  VectorXd gy, gu;
  cost.grad(y, u, gy, gu);

  // d c(y(M), u(M)) / d M[k]
  //   = sum_i G[i]' gy w_{t-i-k}' + gu w_{t-k}'.
  std::vector<VectorXd> Gt_gy(h);
  for (int i = 1; i <= h; ++i)
    Gt_gy[i - 1] = ctx.G.blocks[i - 1].transpose() * gy;

  DacGradient grad(h);
  for (int k = 1; k <= h; ++k) {
    MatrixXd g = gu * ctx.w_lag(k).transpose();
    for (int i = 1; i <= h; ++i)
      g.noalias() += Gt_gy[i - 1] * ctx.w_lag(i + k).transpose();
    grad[k - 1] = std::move(g);
  }
  return grad;
}

DacParams ogd_step(const DacParams& M, const DacGradient& grad, double eta) {
  require(static_cast<int>(grad.size()) == M.h(),
          "ogd_step: gradient shape mismatch");
  DacParams next = M;
  for (int k = 0; k < M.h(); ++k) {
    require(grad[k].rows() == M.m() && grad[k].cols() == M.q(),
            "ogd_step: gradient block shape mismatch");
    next.blocks[k] -= eta * grad[k];
  }
  return project_dac(std::move(next));
}

OcoConstants compute_oco_constants(const OcoConstantsInput& in) {
  require_config(in.gamma > 0.0 && in.gamma < 1.0,
                 "oco constants: gamma must lie in (0, 1)");
  require_config(in.h >= 1 && in.n >= 1 && in.m >= 1,
                 "oco constants: h, n, m must be positive");
  const double h = static_cast<double>(in.h);
  OcoConstants c;
  c.domain_radius =
      std::max(in.kappa_M * in.kappa_w * h +
                   in.kappa_a * in.kappa_w / in.gamma + in.kappa_e +
                   in.kappa_a * in.kappa_b * in.kappa_M * in.kappa_w * h /
                       in.gamma,
               1.0);
  c.lip_memory = in.lip * c.domain_radius *
                 (in.kappa_a * in.kappa_b * in.kappa_w * std::sqrt(h) +
                  in.kappa_w * std::sqrt(h));
  c.grad_norm_bound =
      in.grad_bound * c.domain_radius * h * in.n * in.m *
      (in.kappa_a * in.kappa_b * in.kappa_w / in.gamma + in.kappa_w);
  c.diameter = 2.0 * in.kappa_M * std::sqrt(h);
  return c;
}

double theoretical_learning_rate(const OcoConstants& c, int h, int T) {
  require_config(T >= 1 && h >= 1, "learning rate: T and h must be positive");
  const double hh = static_cast<double>(h);
  const double denom = std::sqrt(
      c.grad_norm_bound * (c.grad_norm_bound + c.lip_memory * hh * hh) *
      static_cast<double>(T));
  require_config(denom > 0.0, "learning rate: degenerate constants");
  return c.diameter / denom;
}

int theoretical_history(int T, double gamma) {
  require_config(T >= 1, "history length: T must be positive");
  require_config(gamma > 0.0 && gamma < 1.0,
                 "history length: gamma must lie in (0, 1)");
  if (T == 1) return 1;
  const double h =
      std::log(static_cast<double>(T)) / std::log(1.0 / (1.0 - gamma));
  return static_cast<int>(std::max<long long>(1, snapped_ceil(h)));
}

}  // namespace tvdac
