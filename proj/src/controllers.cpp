#include "tvdac/controllers.hpp"

#include <cmath>
#include <deque>

namespace tvdac {

std::string default_controller_name(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::OlcFk: return "olc-fk";
    case ControllerKind::OlcZk: return "olc-zk";
    case ControllerKind::OlcZkCpd: return "olc-zk-cpd";
    case ControllerKind::FixedM: return "fixed-m";
    case ControllerKind::RandomM: return "random-m";
    case ControllerKind::FixedG: return "fixed-g";
    case ControllerKind::RandomG: return "random-g";
    case ControllerKind::OlcTi: return "olc-ti";
  }
  throw ContractError("unknown controller kind");
}

bool ControllerSpec::uses_estimator() const {
  switch (kind) {
    case ControllerKind::OlcZk:
    case ControllerKind::OlcZkCpd:
    case ControllerKind::FixedG:
    case ControllerKind::RandomG:
    case ControllerKind::OlcTi:
      return true;
    default:
      return false;
  }
}

bool ControllerSpec::is_learning() const {
  switch (kind) {
    case ControllerKind::OlcFk:
    case ControllerKind::OlcZk:
    case ControllerKind::OlcZkCpd:
    case ControllerKind::FixedG:
    case ControllerKind::RandomG:
    case ControllerKind::OlcTi:
      return true;
    default:
      return false;
  }
}

void ControllerSpec::validate() const {
  require_config(h >= 1, "controller: h must be positive");
  require_config(kappa_M >= 0.0, "controller: kappa_M must be nonnegative");
  if (is_learning())
    require_config(eta > 0.0, "controller: eta must be positive");
  if (uses_estimator()) estimator.validate(h);
  if (kind == ControllerKind::OlcZkCpd)
    require_config(estimator.sigma > 0.0,
                   "controller: change detection needs sigma > 0");
  if (kind == ControllerKind::OlcTi)
    require_config(explore_steps >= 0,
                   "controller: explore_steps must be nonnegative");
}

namespace {

// Shared bookkeeping: recent-first disturbance window of length 2h.
// Starts zero-filled so lagged reads are well-shaped before step 2h.
class WindowedPolicy : public Policy {
 protected:
  WindowedPolicy(int h, int q)
      : h_(h), q_(q), w_hist_(2 * h, VectorXd::Zero(q)) {}

  void push_w(const VectorXd& w) {
    require(w.size() == q_, "policy: disturbance dimension mismatch");
    w_hist_.insert(w_hist_.begin(), w);
    if (static_cast<int>(w_hist_.size()) > 2 * h_) w_hist_.pop_back();
  }

  int h_, q_;
  std::vector<VectorXd> w_hist_;
};

// Gradient loop with the true operator and true offsets available.
class OlcFkPolicy : public WindowedPolicy {
 public:
  OlcFkPolicy(const ControllerSpec& spec,
              std::shared_ptr<const SystemPath> sys,
              std::shared_ptr<const DisturbanceRealization> dist,
              const VectorXd& x1)
      : WindowedPolicy(spec.h, sys->q),
        sys_(std::move(sys)),
        eta_(spec.eta),
        M_(DacParams::zero(spec.h, sys_->m, sys_->q, spec.kappa_M)) {
    s_seq_ = natural_outputs(*sys_, *dist, x1);
  }

  VectorXd act(int t, const VectorXd&) override {
    (void)t;
    return dac_control(M_, w_hist_);
  }

  void feedback(int t, const StepCost& cost, const VectorXd& w) override {
    TruncatedContext ctx;
    ctx.G = markov_operator(*sys_, t, h_);
    ctx.s = s_seq_[t - 1];
    ctx.w_hist = w_hist_;
    const DacGradient g = grad_truncated_cost(M_, ctx, cost);
    M_ = ogd_step(M_, g, eta_);
    push_w(w);
  }

  StepDiagnostics step_diagnostics() const override {
    StepDiagnostics d;
    d.M = &M_;
    return d;
  }

 private:
  std::shared_ptr<const SystemPath> sys_;
  double eta_;
  DacParams M_;
  std::vector<VectorXd> s_seq_;
};

// Gradient loop against an online estimate source (periodic, change-point,
// frozen, or random), with Gaussian exploration on top of the policy input.
class OlcZkPolicy : public WindowedPolicy {
 public:
  OlcZkPolicy(const ControllerSpec& spec,
              std::shared_ptr<const SystemPath> sys,
              std::unique_ptr<GEstimator> est, double sigma,
              std::uint64_t seed)
      : WindowedPolicy(spec.h, sys->q),
        sys_(std::move(sys)),
        est_(std::move(est)),
        eta_(spec.eta),
        sigma_(sigma),
        setting_(spec.setting),
        rng_(seed),
        M_(DacParams::zero(spec.h, sys_->m, sys_->q, spec.kappa_M)) {}

  VectorXd act(int t, const VectorXd& y) override {
    est_->observe_output(t, y);
    G_hat_ = est_->estimate(t);
    detection_ = est_->detection_at(t);
    VectorXd u = dac_control(M_, w_hist_);
    du_ = sigma_ > 0.0 ? rng_.normal_vector(sys_->m, sigma_)
                       : VectorXd::Zero(sys_->m);
    u += du_;
    est_->record_perturbation(t, du_);
    s_hat_ = estimate_s_hat(setting_, G_hat_, y,
                            setting_ == Setting::Matched ? w_hist_ : u_hist_);
    u_hist_.insert(u_hist_.begin(), u);
    if (static_cast<int>(u_hist_.size()) > h_) u_hist_.pop_back();
    return u;
  }

  void feedback(int t, const StepCost& cost, const VectorXd& w) override {
    (void)t;
    TruncatedContext ctx;
    ctx.G = G_hat_;
    ctx.s = s_hat_;
    ctx.w_hist = w_hist_;
    const DacGradient g = grad_truncated_cost(M_, ctx, cost);
    M_ = ogd_step(M_, g, eta_);
    push_w(w);
  }

  StepDiagnostics step_diagnostics() const override {
    StepDiagnostics d;
    d.M = &M_;
    d.G_hat = &G_hat_;
    d.du = du_;
    d.detection = detection_;
    return d;
  }

 private:
  std::shared_ptr<const SystemPath> sys_;
  std::unique_ptr<GEstimator> est_;
  double eta_, sigma_;
  Setting setting_;
  Rng rng_;
  DacParams M_;
  MarkovOperator G_hat_;
  VectorXd s_hat_, du_;
  std::vector<VectorXd> u_hist_;  // applied inputs, recent first, length h
  bool detection_ = false;
};

// Frozen disturbance-feedback parameter; no exploration, no updates.
class FixedMPolicy : public WindowedPolicy {
 public:
  FixedMPolicy(const ControllerSpec& spec, int m, int q, std::uint64_t seed)
      : WindowedPolicy(spec.h, q),
        M_(DacParams::zero(spec.h, m, q, spec.kappa_M)) {
    if (spec.random_init) {
      Rng rng(seed);
      for (auto& b : M_.blocks) {
        const VectorXd v = rng.uniform_ball(m * q, spec.kappa_M);
        b = Eigen::Map<const MatrixXd>(v.data(), m, q);
      }
    }
  }

  VectorXd act(int, const VectorXd&) override {
    return dac_control(M_, w_hist_);
  }
  void feedback(int, const StepCost&, const VectorXd& w) override {
    push_w(w);
  }
  StepDiagnostics step_diagnostics() const override {
    StepDiagnostics d;
    d.M = &M_;
    return d;
  }

 private:
  DacParams M_;
};

// Parameter redrawn uniformly from the feasible set at every step.
class RandomMPolicy : public WindowedPolicy {
 public:
  RandomMPolicy(const ControllerSpec& spec, int m, int q, std::uint64_t seed)
      : WindowedPolicy(spec.h, q),
        rng_(seed),
        M_(DacParams::zero(spec.h, m, q, spec.kappa_M)) {}

  VectorXd act(int, const VectorXd&) override {
    for (auto& b : M_.blocks) {
      const VectorXd v = rng_.uniform_ball(M_.m() * M_.q(), M_.kappa_M);
      b = Eigen::Map<const MatrixXd>(v.data(), M_.m(), M_.q());
    }
    return dac_control(M_, w_hist_);
  }
  void feedback(int, const StepCost&, const VectorXd& w) override {
    push_w(w);
  }
  StepDiagnostics step_diagnostics() const override {
    StepDiagnostics d;
    d.M = &M_;
    return d;
  }

 private:
  Rng rng_;
  DacParams M_;
};

// Pure exploration for a prefix, one ridge estimate, then the gradient loop
// against that frozen estimate with no further exploration.
class OlcTiPolicy : public WindowedPolicy {
 public:
  OlcTiPolicy(const ControllerSpec& spec,
              std::shared_ptr<const SystemPath> sys, std::uint64_t seed)
      : WindowedPolicy(spec.h, sys->q),
        sys_(std::move(sys)),
        eta_(spec.eta),
        sigma_(spec.estimator.sigma),
        lambda_(spec.estimator.lambda),
        setting_(spec.setting),
        rng_(seed),
        M_(DacParams::zero(spec.h, sys_->m, sys_->q, spec.kappa_M)),
        G_hat_(MarkovOperator::zero(spec.h, sys_->p, sys_->m)) {
    explore_steps_ =
        spec.explore_steps > 0
            ? spec.explore_steps
            : static_cast<int>(snapped_ceil(
                  std::pow(static_cast<double>(sys_->T), 2.0 / 3.0)));
    require_config(explore_steps_ >= spec.h + 1,
                   "olc-ti: exploration shorter than one regression row");
    bounds_ = GBounds{sys_->kappa_a, sys_->kappa_b, sys_->gamma};
  }

  VectorXd act(int t, const VectorXd& y) override {
    ys_.push_back(y);
    if (t > explore_steps_ && !estimated_) fit_estimate();

    VectorXd u;
    if (t <= explore_steps_) {
      du_ = rng_.normal_vector(sys_->m, sigma_);
      u = du_;
    } else {
      du_ = VectorXd::Zero(sys_->m);
      u = dac_control(M_, w_hist_);
    }
    s_hat_ = estimate_s_hat(setting_, G_hat_, y,
                            setting_ == Setting::Matched ? w_hist_ : u_hist_);
    u_hist_.insert(u_hist_.begin(), u);
    if (static_cast<int>(u_hist_.size()) > h_) u_hist_.pop_back();
    u_hist_all_.push_back(u);
    return u;
  }

  void feedback(int t, const StepCost& cost, const VectorXd& w) override {
    (void)t;
    if (estimated_) {
      TruncatedContext ctx;
      ctx.G = G_hat_;
      ctx.s = s_hat_;
      ctx.w_hist = w_hist_;
      const DacGradient g = grad_truncated_cost(M_, ctx, cost);
      M_ = ogd_step(M_, g, eta_);
    }
    push_w(w);
  }

  StepDiagnostics step_diagnostics() const override {
    StepDiagnostics d;
    d.M = &M_;
    if (estimated_) d.G_hat = &G_hat_;
    d.du = du_;
    return d;
  }

 private:
  void fit_estimate() {
    const int rows = explore_steps_ - h_;
    MatrixXd U(rows, h_ * sys_->m), Y(rows, sys_->p);
    for (int r = 0; r < rows; ++r) {
      const int p = h_ + 1 + r;
      for (int k = 1; k <= h_; ++k)
        U.row(r).segment((k - 1) * sys_->m, sys_->m) =
            u_hist_all_[p - k - 1].transpose();
      Y.row(r) = ys_[p - 1].transpose();
    }
    G_hat_ = project_G(ls_estimate(U, Y, h_, sys_->m, lambda_), bounds_);
    estimated_ = true;
  }

  // Exploration inputs double as the regressors, so keep the full record.
  std::shared_ptr<const SystemPath> sys_;
  double eta_, sigma_, lambda_;
  Setting setting_;
  Rng rng_;
  DacParams M_;
  MarkovOperator G_hat_;
  GBounds bounds_;
  int explore_steps_ = 0;
  bool estimated_ = false;
  VectorXd s_hat_, du_;
  // u_hist_ is the recent length-h window; u_hist_all_ keeps the whole
  // input record because the one-shot fit regresses on the full prefix.
  std::vector<VectorXd> ys_, u_hist_all_, u_hist_;
};

}  // namespace

std::unique_ptr<Policy> make_policy(
    const ControllerSpec& spec, std::shared_ptr<const SystemPath> sys,
    std::shared_ptr<const DisturbanceRealization> dist, const VectorXd& x1,
    std::uint64_t seed, const MarkovOperator* fixed_G) {
  spec.validate();
  require(sys && dist, "make_policy: null system or disturbance");
  if (spec.setting == Setting::Matched)
    require_config(sys->q == sys->m,
                   "make_policy: matched setting needs q == m");

  const GBounds bounds{sys->kappa_a, sys->kappa_b, sys->gamma};
  switch (spec.kind) {
    case ControllerKind::OlcFk:
      return std::make_unique<OlcFkPolicy>(spec, sys, dist, x1);
    case ControllerKind::OlcZk: {
      EstimatorConfig cfg = spec.estimator;
      cfg.mode = EstimatorMode::Periodic;
      auto est = std::make_unique<PeriodicEstimator>(cfg, bounds, spec.h,
                                                     sys->p, sys->m);
      return std::make_unique<OlcZkPolicy>(spec, sys, std::move(est),
                                           cfg.sigma, seed);
    }
    case ControllerKind::OlcZkCpd: {
      EstimatorConfig cfg = spec.estimator;
      cfg.mode = EstimatorMode::Cpd;
      double beta = cfg.beta_override;
      if (beta <= 0.0) {
        BetaInput bi;
        bi.n = sys->n;
        bi.m = sys->m;
        bi.h = spec.h;
        bi.N = cfg.N;
        bi.delta = cfg.delta;
        bi.lambda = cfg.lambda;
        bi.sigma = cfg.sigma;
        bi.kappa_a = sys->kappa_a;
        bi.kappa_b = sys->kappa_b;
        bi.kappa_M = spec.kappa_M;
        bi.kappa_w = dist->kappa_w;
        bi.kappa_e = dist->kappa_e;
        bi.gamma = sys->gamma;
        beta = compute_beta(bi);
      }
      auto est = std::make_unique<CpdEstimator>(cfg, bounds, spec.h, sys->p,
                                                sys->m, beta);
      return std::make_unique<OlcZkPolicy>(spec, sys, std::move(est),
                                           cfg.sigma, seed);
    }
    case ControllerKind::FixedM:
      return std::make_unique<FixedMPolicy>(spec, sys->m, sys->q, seed);
    case ControllerKind::RandomM:
      return std::make_unique<RandomMPolicy>(spec, sys->m, sys->q, seed);
    case ControllerKind::FixedG: {
      MarkovOperator G;
      if (fixed_G) {
        require(fixed_G->h() == spec.h && fixed_G->p() == sys->p &&
                    fixed_G->m() == sys->m,
                "make_policy: supplied operator shape mismatch");
        G = *fixed_G;
      } else {
        Rng rng(mix_seed(seed, 1));
        G = random_feasible_G(bounds, spec.h, sys->p, sys->m, rng);
      }
      auto est = std::make_unique<FrozenEstimator>(std::move(G));
      return std::make_unique<OlcZkPolicy>(spec, sys, std::move(est),
                                           spec.estimator.sigma, seed);
    }
    case ControllerKind::RandomG: {
      auto est = std::make_unique<RandomGEstimator>(
          bounds, spec.h, sys->p, sys->m,
          spec.estimator.period_length(spec.h), mix_seed(seed, 1));
      return std::make_unique<OlcZkPolicy>(spec, sys, std::move(est),
                                           spec.estimator.sigma, seed);
    }
    case ControllerKind::OlcTi:
      return std::make_unique<OlcTiPolicy>(spec, sys, seed);
  }
  throw ContractError("make_policy: unknown controller kind");
}

}  // namespace tvdac
