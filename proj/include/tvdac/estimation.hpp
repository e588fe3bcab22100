#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "tvdac/rng.hpp"
#include "tvdac/system.hpp"
#include "tvdac/types.hpp"

namespace tvdac {

// Feasible set for operator estimates: block k lives in the spectral-norm
// ball of radius kappa_a * kappa_b * (1 - gamma)^(k-1).
struct GBounds {
  double kappa_a = 1.0;
  double kappa_b = 1.0;
  double gamma = 0.5;

  double block_bound(int k) const;
};

enum class EstimatorMode { Periodic, Cpd };

struct EstimatorConfig {
  EstimatorMode mode = EstimatorMode::Periodic;
  int N = 7;              // regression rows per period
  double lambda = 1e-3;   // ridge weight
  double sigma = 0.2;     // exploration scale
  double delta = 0.1;     // confidence level for the derived radius
  double beta_override = 0.0;  // > 0 replaces the derived confidence radius

  // Period length: estimates refresh every period_length(h) steps.
  int period_length(int h) const {
    return mode == EstimatorMode::Periodic ? N + 2 * h : N + h;
  }
  void validate(int h) const;
};

// Ridge least squares on rows y_r ~ G_stacked * u_r.  U is rows x (h m) with
// row r = [du_{r,1}; ...; du_{r,h}] stacked, Y is rows x p.  lambda = 0 is
// allowed when U has full column rank; otherwise SingularSystemError.
MarkovOperator ls_estimate(const MatrixXd& U, const MatrixXd& Y, int h, int m,
                           double lambda);

// Euclidean projection onto the feasible set: per-block singular values are
// clipped to the block bound.  Already-feasible blocks pass through
// unchanged (bit-identical).
MarkovOperator project_G(const MarkovOperator& G, const GBounds& bounds);

struct BetaInput {
  int n = 1;       // state dimension
  int m = 1;       // input dimension
  int h = 1;       // operator length
  int N = 1;       // rows per period
  double delta = 0.1;
  double lambda = 1e-3;
  double sigma = 0.2;
  double kappa_a = 1.0, kappa_b = 1.0, kappa_M = 1.0;
  double kappa_w = 1.0, kappa_e = 0.0;
  double gamma = 0.5;
};

// High-probability radius of the per-period estimate error, used by the
// change-point threshold 2 beta / (sigma sqrt(N)).
double compute_beta(const BetaInput& in);

struct TheoreticalScalings {
  long long N = 1;
  double sigma = 1.0;
};

// Horizon-driven choices N = ceil(changes^{-4/5} T^{4/5}) (at least
// h_floor + 1) and sigma = changes^{1/5} T^{-1/5}.
TheoreticalScalings theoretical_scalings(int num_changes, long long T,
                                         int h_floor = 0);

// Offset estimate s^ = y - sum_k G[k] hist[k-1] with hist recent first and
// zero-padded.  In the matched setting hist holds past disturbances; in the
// general setting it holds past (total) inputs.
enum class Setting { Matched, General };

VectorXd estimate_s_hat(Setting setting, const MarkovOperator& G,
                        const VectorXd& y, const std::vector<VectorXd>& hist);

struct EstimationWindow {
  int k = 0;          // period index within the current epoch
  int t_s = 0, t_e = 0;
  int row_begin = 0, row_end = 0;  // regression rows (inclusive)
};

struct PeriodEstimate {
  EstimationWindow window;
  MarkovOperator raw;        // unprojected ridge solution
  MarkovOperator projected;
  bool detection = false;    // change declared at window.t_e
};

struct EstimateTimeline {
  std::vector<PeriodEstimate> periods;
};

// Online source of operator estimates.  Call order within step t:
//   observe_output(t, y_t); estimate(t); record_perturbation(t, du_t).
class GEstimator {
 public:
  virtual ~GEstimator() = default;
  virtual void observe_output(int t, const VectorXd& y) = 0;
  virtual void record_perturbation(int t, const VectorXd& du) = 0;
  // Estimate in force at step t (valid after observe_output(t)).
  virtual const MarkovOperator& estimate(int t) = 0;
  virtual bool detection_at(int t) const { return false; }
  virtual int detections() const { return 0; }
  virtual const EstimateTimeline* timeline() const { return nullptr; }
};

// Fresh ridge estimate at the end of every period, held constant in between.
class PeriodicEstimator : public GEstimator {
 public:
  PeriodicEstimator(const EstimatorConfig& cfg, const GBounds& bounds, int h,
                    int p, int m);
  void observe_output(int t, const VectorXd& y) override;
  void record_perturbation(int t, const VectorXd& du) override;
  const MarkovOperator& estimate(int t) override;
  const EstimateTimeline* timeline() const override { return &timeline_; }

 private:
  EstimatorConfig cfg_;
  GBounds bounds_;
  int h_, p_, m_;
  int k_ = 1, t_s_ = 1, t_e_ = 0;
  std::vector<VectorXd> ys_, dus_;
  MarkovOperator current_;
  EstimateTimeline timeline_;
};

// Period estimates drive a change detector; the held estimate is the ridge
// solution over all rows since the last detection.
class CpdEstimator : public GEstimator {
 public:
  // threshold_beta: confidence radius entering the detection threshold.
  CpdEstimator(const EstimatorConfig& cfg, const GBounds& bounds, int h, int p,
               int m, double threshold_beta);
  void observe_output(int t, const VectorXd& y) override;
  void record_perturbation(int t, const VectorXd& du) override;
  const MarkovOperator& estimate(int t) override;
  bool detection_at(int t) const override;
  int detections() const override { return static_cast<int>(detection_times_.size()); }
  const EstimateTimeline* timeline() const override { return &timeline_; }
  const std::vector<int>& detection_times() const { return detection_times_; }
  int last_detection() const { return t_d_; }

 private:
  void add_running_row(int row);
  void refresh_running(int t);

  EstimatorConfig cfg_;
  GBounds bounds_;
  int h_, p_, m_;
  double threshold_;
  int k_ = 1, t_s_ = 1, t_e_ = 0;
  int t_d_ = 1;        // last detection time (1 = start of stream)
  int next_row_ = 0;   // next regression row to fold into the accumulators
  long long rows_ = 0;
  MatrixXd S_, b_;     // running normal equations
  std::vector<VectorXd> ys_, dus_;
  std::vector<MarkovOperator> epoch_raw_;  // period estimates since detection
  std::vector<int> detection_times_;
  MarkovOperator current_;
  EstimateTimeline timeline_;
};

// Baseline estimate sources.
class FrozenEstimator : public GEstimator {
 public:
  explicit FrozenEstimator(MarkovOperator G) : G_(std::move(G)) {}
  void observe_output(int, const VectorXd&) override {}
  void record_perturbation(int, const VectorXd&) override {}
  const MarkovOperator& estimate(int) override { return G_; }

 private:
  MarkovOperator G_;
};

// Redraws a random feasible operator at the start of every period.
class RandomGEstimator : public GEstimator {
 public:
  RandomGEstimator(const GBounds& bounds, int h, int p, int m, int period,
                   std::uint64_t seed);
  void observe_output(int t, const VectorXd& y) override;
  void record_perturbation(int, const VectorXd&) override {}
  const MarkovOperator& estimate(int t) override { return current_; }

 private:
  void redraw();
  GBounds bounds_;
  int h_, p_, m_, period_;
  Rng rng_;
  MarkovOperator current_;
};

// Uniform-ish random member of the feasible set: each block is a normal draw
// rescaled to a uniform fraction of its bound.
MarkovOperator random_feasible_G(const GBounds& bounds, int h, int p, int m,
                                 Rng& rng);

}  // namespace tvdac
