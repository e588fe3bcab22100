#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tvdac/rng.hpp"
#include "tvdac/types.hpp"

namespace tvdac {

// How the (A_t, B_t) pair evolves over the horizon.
enum class Schedule { Constant, Piecewise, PerStepRandom };

// What drives the disturbance input channel B_w.
enum class DisturbanceChannel { Identity, MatchB, Random };

struct SystemConfig {
  int n = 3;  // state dim
  int m = 2;  // input dim
  int p = 3;  // output dim
  int q = 3;  // disturbance dim
  int T = 100;
  double gamma = 0.5;    // contraction margin: |A_t|_2 <= 1 - gamma
  double kappa_b = 1.0;  // bound on |B_t|_2
  Schedule schedule = Schedule::Constant;
  std::vector<int> change_times;  // regime starts, used for Piecewise
  bool constant_C = true;         // hold C fixed over the whole horizon
  DisturbanceChannel channel = DisturbanceChannel::Identity;

  void validate() const;
};

// A fully materialized time-varying linear system over t = 1..T:
//   x_{t+1} = A_t x_t + B_t u_t + Bw_t w_t,   y_t = C_t x_t + e_t.
struct SystemPath {
  int T = 0, n = 0, m = 0, p = 0, q = 0;
  double gamma = 0.0;
  double kappa_a = 0.0;  // max_t |C_t|_2
  double kappa_b = 0.0;  // bound on |B_t|_2 (config value)
  std::vector<MatrixXd> A, B, Bw, C;  // index 0 holds t = 1
  std::vector<int> change_times;      // strictly increasing, in [2, T]

  // Accessors clamp t below 1 to 1, matching the early-time convention that
  // pre-horizon matrices equal the first ones.
  const MatrixXd& A_at(int t) const { return A[clamp_index(t)]; }
  const MatrixXd& B_at(int t) const { return B[clamp_index(t)]; }
  const MatrixXd& Bw_at(int t) const { return Bw[clamp_index(t)]; }
  const MatrixXd& C_at(int t) const { return C[clamp_index(t)]; }

  int num_changes() const { return static_cast<int>(change_times.size()); }

 private:
  int clamp_index(int t) const {
    require(t <= T, "system accessor: t beyond horizon");
    return t < 1 ? 0 : t - 1;
  }
};

struct DisturbanceConfig {
  enum class Kind { UniformBall, Sinusoid, Constant };
  Kind kind = Kind::UniformBall;
  double kappa_w = 1.0;
  double kappa_e = 0.0;
  double period = 50.0;  // Sinusoid only
  void validate() const;
};

// Realized process and measurement disturbances over t = 1..T.  w_at returns
// zero for t < 1 (pre-episode padding).
struct DisturbanceRealization {
  int T = 0, q = 0, p = 0;
  double kappa_w = 0.0;
  double kappa_e = 0.0;
  std::vector<VectorXd> w, e;

  VectorXd w_at(int t) const {
    require(t <= T, "disturbance accessor: t beyond horizon");
    if (t < 1) return VectorXd::Zero(q);
    return w[t - 1];
  }
  VectorXd e_at(int t) const {
    require(t <= T, "disturbance accessor: t beyond horizon");
    if (t < 1) return VectorXd::Zero(p);
    return e[t - 1];
  }
};

// The first h Markov parameters of the system as seen from time t:
//   block k = C_t A_{t-1} ... A_{t-k+1} B_{t-k}   (p x m).
struct MarkovOperator {
  std::vector<MatrixXd> blocks;  // blocks[k-1] holds block k

  int h() const { return static_cast<int>(blocks.size()); }
  int p() const { return blocks.empty() ? 0 : static_cast<int>(blocks[0].rows()); }
  int m() const { return blocks.empty() ? 0 : static_cast<int>(blocks[0].cols()); }

  // Horizontal concatenation [block 1, ..., block h], p x (h m).
  MatrixXd stacked() const;
  // Spectral norm of the stacked matrix.
  double spectral_norm() const;
  double frobenius_distance(const MarkovOperator& other) const;

  static MarkovOperator zero(int h, int p, int m);
};

SystemPath generate_system(const SystemConfig& cfg, std::uint64_t seed);

DisturbanceRealization generate_disturbance(const DisturbanceConfig& cfg,
                                            int T, int q, int p,
                                            std::uint64_t seed);

// One step of the recursion; returns (x_{t+1}, y_t).
std::pair<VectorXd, VectorXd> step(const SystemPath& sys, int t,
                                   const VectorXd& x, const VectorXd& u,
                                   const DisturbanceRealization& dist);

MarkovOperator markov_operator(const SystemPath& sys, int t, int h);

// Output at time t of the zero-input system driven only by disturbances,
// started from x1 at t = 1.
VectorXd natural_output(const SystemPath& sys,
                        const DisturbanceRealization& dist, int t,
                        const VectorXd& x1);

// All natural outputs s_1..s_T in one forward pass.
std::vector<VectorXd> natural_outputs(const SystemPath& sys,
                                      const DisturbanceRealization& dist,
                                      const VectorXd& x1);

}  // namespace tvdac
