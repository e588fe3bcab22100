#include "tvdac/system.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace tvdac {

namespace {

double spectral_norm(const MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXd> svd(M);
  return svd.singularValues()(0);
}

// Scale the matrix down so its spectral norm is at most `bound`.
MatrixXd cap_spectral_norm(MatrixXd M, double bound) {
  const double s = spectral_norm(M);
  if (s > bound) M *= bound / s;
  return M;
}

}  // namespace

void SystemConfig::validate() const {
  require_config(n >= 1 && m >= 1 && p >= 1 && q >= 1,
                 "system config: dimensions must be positive");
  require_config(T >= 1, "system config: T must be positive");
  require_config(gamma > 0.0 && gamma < 1.0,
                 "system config: gamma must lie in (0, 1)");
  require_config(kappa_b > 0.0, "system config: kappa_b must be positive");
  if (channel == DisturbanceChannel::Identity)
    require_config(q == n, "system config: identity channel needs q == n");
  if (channel == DisturbanceChannel::MatchB)
    require_config(q == m, "system config: matched channel needs q == m");
  if (schedule == Schedule::Piecewise) {
    int prev = 1;
    for (int c : change_times) {
      require_config(c > prev && c <= T,
                     "system config: change_times must be strictly increasing "
                     "within [2, T]");
      prev = c;
    }
  } else {
    require_config(change_times.empty(),
                   "system config: change_times only apply to the piecewise "
                   "schedule");
  }
}

void DisturbanceConfig::validate() const {
  require_config(kappa_w >= 0.0 && kappa_e >= 0.0,
                 "disturbance config: bounds must be nonnegative");
  if (kind == Kind::Sinusoid)
    require_config(period > 0.0, "disturbance config: period must be positive");
}

MatrixXd MarkovOperator::stacked() const {
  if (blocks.empty()) return MatrixXd();
  MatrixXd S(p(), h() * m());
  for (int k = 0; k < h(); ++k) S.middleCols(k * m(), m()) = blocks[k];
  return S;
}

double MarkovOperator::spectral_norm() const {
  const MatrixXd S = stacked();
  if (S.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXd> svd(S);
  return svd.singularValues()(0);
}

double MarkovOperator::frobenius_distance(const MarkovOperator& other) const {
  require(h() == other.h() && p() == other.p() && m() == other.m(),
          "markov operator distance: shape mismatch");
  double acc = 0.0;
  for (int k = 0; k < h(); ++k)
    acc += (blocks[k] - other.blocks[k]).squaredNorm();
  return std::sqrt(acc);
}

MarkovOperator MarkovOperator::zero(int h, int p, int m) {
  MarkovOperator G;
  G.blocks.assign(h, MatrixXd::Zero(p, m));
  return G;
}

SystemPath generate_system(const SystemConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);

  SystemPath sys;
  sys.T = cfg.T;
  sys.n = cfg.n;
  sys.m = cfg.m;
  sys.p = cfg.p;
  sys.q = cfg.q;
  sys.gamma = cfg.gamma;
  sys.kappa_b = cfg.kappa_b;
  sys.A.reserve(cfg.T);
  sys.B.reserve(cfg.T);
  sys.Bw.reserve(cfg.T);
  sys.C.reserve(cfg.T);

  MatrixXd C_const;
  if (cfg.constant_C) C_const = rng.normal_matrix(cfg.p, cfg.n);

  auto draw_regime = [&](MatrixXd& A, MatrixXd& B, MatrixXd& Bw, MatrixXd& C) {
    A = cap_spectral_norm(rng.normal_matrix(cfg.n, cfg.n), 1.0 - cfg.gamma);
    B = cap_spectral_norm(rng.normal_matrix(cfg.n, cfg.m), cfg.kappa_b);
    switch (cfg.channel) {
      case DisturbanceChannel::Identity:
        Bw = MatrixXd::Identity(cfg.n, cfg.q);
        break;
      case DisturbanceChannel::MatchB:
        Bw = B;
        break;
      case DisturbanceChannel::Random:
        Bw = cap_spectral_norm(rng.normal_matrix(cfg.n, cfg.q), cfg.kappa_b);
        break;
    }
    C = cfg.constant_C ? C_const : rng.normal_matrix(cfg.p, cfg.n);
  };

  switch (cfg.schedule) {
    case Schedule::Constant: {
      MatrixXd A, B, Bw, C;
      draw_regime(A, B, Bw, C);
      sys.A.assign(cfg.T, A);
      sys.B.assign(cfg.T, B);
      sys.Bw.assign(cfg.T, Bw);
      sys.C.assign(cfg.T, C);
      break;
    }
    case Schedule::Piecewise: {
      MatrixXd A, B, Bw, C;
      draw_regime(A, B, Bw, C);
      std::size_t next = 0;
      for (int t = 1; t <= cfg.T; ++t) {
        if (next < cfg.change_times.size() && t == cfg.change_times[next]) {
          draw_regime(A, B, Bw, C);
          ++next;
        }
        sys.A.push_back(A);
        sys.B.push_back(B);
        sys.Bw.push_back(Bw);
        sys.C.push_back(C);
      }
      sys.change_times = cfg.change_times;
      break;
    }
    case Schedule::PerStepRandom: {
      for (int t = 1; t <= cfg.T; ++t) {
        MatrixXd A, B, Bw, C;
        draw_regime(A, B, Bw, C);
        sys.A.push_back(A);
        sys.B.push_back(B);
        sys.Bw.push_back(Bw);
        sys.C.push_back(C);
        if (t >= 2) sys.change_times.push_back(t);
      }
      break;
    }
  }

  double ka = 0.0;
  for (const auto& C : sys.C) ka = std::max(ka, spectral_norm(C));
  sys.kappa_a = ka;
  return sys;
}

DisturbanceRealization generate_disturbance(const DisturbanceConfig& cfg,
                                            int T, int q, int p,
                                            std::uint64_t seed) {
  cfg.validate();
  require_config(T >= 1 && q >= 1 && p >= 1,
                 "disturbance: T, q, p must be positive");
  Rng rng(seed);

  DisturbanceRealization d;
  d.T = T;
  d.q = q;
  d.p = p;
  d.kappa_w = cfg.kappa_w;
  d.kappa_e = cfg.kappa_e;
  d.w.reserve(T);
  d.e.reserve(T);

  VectorXd phase, direction;
  if (cfg.kind == DisturbanceConfig::Kind::Sinusoid) {
    phase = VectorXd(q);
    for (int i = 0; i < q; ++i) phase(i) = rng.uniform(0.0, 2.0 * M_PI);
  } else if (cfg.kind == DisturbanceConfig::Kind::Constant) {
    direction = rng.uniform_sphere(q, 1.0);
  }

  for (int t = 1; t <= T; ++t) {
    VectorXd w;
    switch (cfg.kind) {
      case DisturbanceConfig::Kind::UniformBall:
        w = cfg.kappa_w > 0.0 ? rng.uniform_ball(q, cfg.kappa_w)
                              : VectorXd::Zero(q);
        break;
      case DisturbanceConfig::Kind::Sinusoid: {
        w = VectorXd(q);
        const double amp = cfg.kappa_w / std::sqrt(static_cast<double>(q));
        for (int i = 0; i < q; ++i)
          w(i) = amp * std::sin(2.0 * M_PI * t / cfg.period + phase(i));
        break;
      }
      case DisturbanceConfig::Kind::Constant:
        w = cfg.kappa_w * direction;
        break;
    }
    d.w.push_back(std::move(w));
    d.e.push_back(cfg.kappa_e > 0.0 ? rng.uniform_ball(p, cfg.kappa_e)
                                    : VectorXd::Zero(p));
  }
  return d;
}

std::pair<VectorXd, VectorXd> step(const SystemPath& sys, int t,
                                   const VectorXd& x, const VectorXd& u,
                                   const DisturbanceRealization& dist) {
  require(t >= 1 && t <= sys.T, "step: t outside horizon");
  require(x.size() == sys.n, "step: state dimension mismatch");
  require(u.size() == sys.m, "step: input dimension mismatch");
  require(dist.q == sys.q && dist.p == sys.p && dist.T >= t,
          "step: disturbance shape mismatch");
  VectorXd y = sys.C_at(t) * x + dist.e_at(t);
  VectorXd x_next =
      sys.A_at(t) * x + sys.B_at(t) * u + sys.Bw_at(t) * dist.w_at(t);
  return {std::move(x_next), std::move(y)};
}

MarkovOperator markov_operator(const SystemPath& sys, int t, int h) {
  require(h >= 1, "markov_operator: h must be positive");
  require(t >= 1 && t <= sys.T, "markov_operator: t outside horizon");
  MarkovOperator G;
  G.blocks.reserve(h);
  MatrixXd P = sys.C_at(t);          // C_t A_{t-1} ... A_{t-k+1}
  G.blocks.push_back(P * sys.B_at(t - 1));
  for (int k = 2; k <= h; ++k) {
    P = P * sys.A_at(t - k + 1);
    G.blocks.push_back(P * sys.B_at(t - k));
  }
  return G;
}

VectorXd natural_output(const SystemPath& sys,
                        const DisturbanceRealization& dist, int t,
                        const VectorXd& x1) {
  require(t >= 1 && t <= sys.T, "natural_output: t outside horizon");
  require(x1.size() == sys.n, "natural_output: x1 dimension mismatch");
  VectorXd x = x1;
  for (int tau = 1; tau < t; ++tau)
    x = sys.A_at(tau) * x + sys.Bw_at(tau) * dist.w_at(tau);
  return sys.C_at(t) * x + dist.e_at(t);
}

std::vector<VectorXd> natural_outputs(const SystemPath& sys,
                                      const DisturbanceRealization& dist,
                                      const VectorXd& x1) {
  require(x1.size() == sys.n, "natural_outputs: x1 dimension mismatch");
  std::vector<VectorXd> s;
  s.reserve(sys.T);
  VectorXd x = x1;
  for (int t = 1; t <= sys.T; ++t) {
    s.push_back(sys.C_at(t) * x + dist.e_at(t));
    if (t < sys.T) x = sys.A_at(t) * x + sys.Bw_at(t) * dist.w_at(t);
  }
  return s;
}

}  // namespace tvdac
