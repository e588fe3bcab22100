#include "tvdac/estimation.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>

namespace tvdac {

double GBounds::block_bound(int k) const {
  require(k >= 1, "block bound: k must be positive");
  return kappa_a * kappa_b * std::pow(1.0 - gamma, k - 1);
}

void EstimatorConfig::validate(int h) const {
  require_config(h >= 1, "estimator config: h must be positive");
  require_config(N >= 1, "estimator config: N must be positive");
  require_config(lambda >= 0.0, "estimator config: lambda must be nonnegative");
  require_config(sigma >= 0.0, "estimator config: sigma must be nonnegative");
  require_config(delta > 0.0 && delta < 1.0,
                 "estimator config: delta must lie in (0, 1)");
  require_config(beta_override >= 0.0,
                 "estimator config: beta_override must be nonnegative");
}

MarkovOperator ls_estimate(const MatrixXd& U, const MatrixXd& Y, int h, int m,
                           double lambda) {
  require(h >= 1 && m >= 1, "ls_estimate: h and m must be positive");
  require(U.cols() == static_cast<long>(h) * m,
          "ls_estimate: regressor width must be h*m");
  require(U.rows() == Y.rows(), "ls_estimate: row count mismatch");
  require(lambda >= 0.0, "ls_estimate: lambda must be nonnegative");
  if (U.rows() < 1) throw InsufficientDataError("ls_estimate: no rows");

  const int d = h * m;
  MatrixXd S = U.transpose() * U;
  S.diagonal().array() += lambda;
  if (lambda == 0.0) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(S);
    const double emax = es.eigenvalues().cwiseAbs().maxCoeff();
    if (es.eigenvalues().minCoeff() <= 1e-12 * std::max(emax, 1.0))
      throw SingularSystemError(
          "ls_estimate: rank-deficient regressors with lambda = 0");
  }
  const MatrixXd theta = S.ldlt().solve(U.transpose() * Y);  // d x p
  const MatrixXd stacked = theta.transpose();                // p x d

  MarkovOperator G;
  G.blocks.reserve(h);
  for (int k = 0; k < h; ++k) G.blocks.push_back(stacked.middleCols(k * m, m));
  return G;
}

MarkovOperator project_G(const MarkovOperator& G, const GBounds& bounds) {
  MarkovOperator out;
  out.blocks.reserve(G.h());
  for (int k = 1; k <= G.h(); ++k) {
    const MatrixXd& block = G.blocks[k - 1];
    const double bound = bounds.block_bound(k);
    Eigen::JacobiSVD<MatrixXd> values(block);
    if (values.singularValues().size() == 0 ||
        values.singularValues()(0) <= bound) {
      out.blocks.push_back(block);  // feasible: pass through untouched
      continue;
    }
    Eigen::JacobiSVD<MatrixXd> svd(block,
                                   Eigen::ComputeThinU | Eigen::ComputeThinV);
    VectorXd s = svd.singularValues();
    for (int i = 0; i < s.size(); ++i) s(i) = std::min(s(i), bound);
    out.blocks.push_back(svd.matrixU() * s.asDiagonal() *
                         svd.matrixV().transpose());
  }
  return out;
}

double compute_beta(const BetaInput& in) {
  require_config(in.n >= 1 && in.m >= 1 && in.h >= 1 && in.N >= 1,
                 "beta: dimensions must be positive");
  require_config(in.delta > 0.0 && in.delta < 1.0,
                 "beta: delta must lie in (0, 1)");
  require_config(in.sigma > 0.0, "beta: sigma must be positive");
  require_config(in.gamma > 0.0 && in.gamma < 1.0,
                 "beta: gamma must lie in (0, 1)");
  const double h = static_cast<double>(in.h);
  const double R_u = in.kappa_M * in.kappa_w * h +
                     3.0 * in.sigma * std::sqrt(in.m + std::log(1.0 / in.delta));
  const double R_s = in.kappa_a * in.kappa_w / in.gamma + in.kappa_e +
                     2.0 * R_u * in.kappa_a * in.kappa_b / in.gamma;
  const double zeta = R_s +
                      in.kappa_a * in.kappa_b * in.kappa_M * in.kappa_w * h /
                          in.gamma +
                      in.kappa_a * in.kappa_b * R_u / in.gamma;
  const double conf =
      std::sqrt(in.n * std::log(2.0) + 2.0 * std::log(2.0 * h / in.delta));
  const double ridge_term = in.lambda * in.kappa_a * in.kappa_b /
                            (in.gamma * zeta * in.sigma *
                             std::sqrt(h * static_cast<double>(in.N)));
  return 2.0 * std::sqrt(h) * zeta * (conf + ridge_term);
}

TheoreticalScalings theoretical_scalings(int num_changes, long long T,
                                         int h_floor) {
  require_config(num_changes >= 1, "scalings: num_changes must be >= 1");
  require_config(T >= 1, "scalings: T must be positive");
  TheoreticalScalings s;
  const double ratio = static_cast<double>(T) / num_changes;
  s.N = std::max<long long>(h_floor + 1, snapped_ceil(std::pow(ratio, 0.8)));
  s.sigma = std::pow(static_cast<double>(num_changes) / T, 0.2);
  return s;
}

VectorXd estimate_s_hat(Setting setting, const MarkovOperator& G,
                        const VectorXd& y, const std::vector<VectorXd>& hist) {
  (void)setting;  // matched setting feeds disturbances, general feeds inputs;
                  // the arithmetic is shared
  require(G.h() >= 1, "estimate_s_hat: empty operator");
  require(y.size() == G.p(), "estimate_s_hat: output dimension mismatch");
  VectorXd s = y;
  const int avail = static_cast<int>(hist.size());
  for (int k = 1; k <= G.h() && k <= avail; ++k) {
    require(hist[k - 1].size() == G.m(),
            "estimate_s_hat: history dimension mismatch");
    s.noalias() -= G.blocks[k - 1] * hist[k - 1];
  }
  return s;
}

namespace {

// Regression row p: regressor [du_{p-1}; ...; du_{p-h}], target y_p.
// dus[i] holds du_{i+1}, ys[i] holds y_{i+1}.
// InnerStride<> lets the Ref bind rows of column-major matrices.
using RowRef = Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;

void fill_row(const std::vector<VectorXd>& ys, const std::vector<VectorXd>& dus,
              int p, int h, int m, RowRef u_row, RowRef y_row) {
  for (int k = 1; k <= h; ++k)
    u_row.segment((k - 1) * m, m) = dus[p - k - 1].transpose();
  y_row = ys[p - 1].transpose();
}

}  // namespace

PeriodicEstimator::PeriodicEstimator(const EstimatorConfig& cfg,
                                     const GBounds& bounds, int h, int p,
                                     int m)
    : cfg_(cfg), bounds_(bounds), h_(h), p_(p), m_(m) {
  cfg_.validate(h);
  require_config(cfg.mode == EstimatorMode::Periodic,
                 "periodic estimator: wrong mode");
  t_e_ = cfg_.period_length(h_);
  current_ = MarkovOperator::zero(h_, p_, m_);
}

void PeriodicEstimator::observe_output(int t, const VectorXd& y) {
  require(t == static_cast<int>(ys_.size()) + 1,
          "periodic estimator: outputs must arrive in order");
  require(y.size() == p_, "periodic estimator: output dimension mismatch");
  ys_.push_back(y);
  if (t != t_e_) return;

  const int row_begin = t_s_ + h_;
  const int row_end = t_e_ - h_;
  const int rows = row_end - row_begin + 1;
  MatrixXd U(rows, h_ * m_), Y(rows, p_);
  for (int r = 0; r < rows; ++r)
    fill_row(ys_, dus_, row_begin + r, h_, m_, U.row(r), Y.row(r));
  PeriodEstimate pe;
  pe.window = {k_, t_s_, t_e_, row_begin, row_end};
  pe.raw = ls_estimate(U, Y, h_, m_, cfg_.lambda);
  pe.projected = project_G(pe.raw, bounds_);
  current_ = pe.projected;
  timeline_.periods.push_back(std::move(pe));

  t_s_ = t_e_;
  t_e_ = t_s_ + cfg_.period_length(h_) - 1;
  ++k_;
}

void PeriodicEstimator::record_perturbation(int t, const VectorXd& du) {
  require(t == static_cast<int>(dus_.size()) + 1,
          "periodic estimator: perturbations must arrive in order");
  require(du.size() == m_, "periodic estimator: input dimension mismatch");
  dus_.push_back(du);
}

const MarkovOperator& PeriodicEstimator::estimate(int t) {
  require(t == static_cast<int>(ys_.size()),
          "periodic estimator: estimate(t) follows observe_output(t)");
  return current_;
}

CpdEstimator::CpdEstimator(const EstimatorConfig& cfg, const GBounds& bounds,
                           int h, int p, int m, double threshold_beta)
    : cfg_(cfg), bounds_(bounds), h_(h), p_(p), m_(m) {
  cfg_.validate(h);
  require_config(cfg.mode == EstimatorMode::Cpd, "cpd estimator: wrong mode");
  require_config(cfg.sigma > 0.0, "cpd estimator: sigma must be positive");
  require_config(threshold_beta > 0.0,
                 "cpd estimator: confidence radius must be positive");
  threshold_ =
      2.0 * threshold_beta / (cfg_.sigma * std::sqrt(static_cast<double>(cfg_.N)));
  t_e_ = cfg_.period_length(h_);
  next_row_ = 1 + h_;
  const int d = h_ * m_;
  S_ = MatrixXd::Zero(d, d);
  b_ = MatrixXd::Zero(d, p_);
  current_ = MarkovOperator::zero(h_, p_, m_);
}

void CpdEstimator::add_running_row(int p) {
  Eigen::RowVectorXd u_row(h_ * m_), y_row(p_);
  fill_row(ys_, dus_, p, h_, m_, u_row, y_row);
  S_.noalias() += u_row.transpose() * u_row;
  b_.noalias() += u_row.transpose() * y_row;
  ++rows_;
}

void CpdEstimator::refresh_running(int t) {
  if (rows_ < 1 || t < t_d_ + 2 * h_) return;  // hold the previous estimate
  MatrixXd S = S_;
  S.diagonal().array() += cfg_.lambda;
  const MatrixXd theta = S.ldlt().solve(b_);
  const MatrixXd stacked = theta.transpose();
  MarkovOperator raw;
  raw.blocks.reserve(h_);
  for (int k = 0; k < h_; ++k)
    raw.blocks.push_back(stacked.middleCols(k * m_, m_));
  current_ = project_G(raw, bounds_);
}

void CpdEstimator::observe_output(int t, const VectorXd& y) {
  require(t == static_cast<int>(ys_.size()) + 1,
          "cpd estimator: outputs must arrive in order");
  require(y.size() == p_, "cpd estimator: output dimension mismatch");
  ys_.push_back(y);

  if (t == t_e_) {
    const int row_begin = t_s_ + h_;
    const int row_end = t_e_;
    const int rows = row_end - row_begin + 1;
    MatrixXd U(rows, h_ * m_), Y(rows, p_);
    for (int r = 0; r < rows; ++r)
      fill_row(ys_, dus_, row_begin + r, h_, m_, U.row(r), Y.row(r));
    PeriodEstimate pe;
    pe.window = {k_, t_s_, t_e_, row_begin, row_end};
    pe.raw = ls_estimate(U, Y, h_, m_, cfg_.lambda);
    pe.projected = project_G(pe.raw, bounds_);

    if (k_ == 1) {
      epoch_raw_.assign(1, pe.raw);
      k_ = 2;
    } else {
      bool detected = false;
      const MatrixXd fresh = pe.raw.stacked();
      for (const auto& base : epoch_raw_) {
        Eigen::JacobiSVD<MatrixXd> svd(fresh - base.stacked());
        if (svd.singularValues()(0) > threshold_) {
          detected = true;
          break;
        }
      }
      if (detected) {
        pe.detection = true;
        detection_times_.push_back(t);
        t_d_ = t;
        epoch_raw_.clear();
        k_ = 1;
        // Restart the running regression from the detection point.
        S_.setZero();
        b_.setZero();
        rows_ = 0;
        next_row_ = t_d_ + h_;
      } else {
        epoch_raw_.push_back(pe.raw);
        ++k_;
      }
    }
    timeline_.periods.push_back(std::move(pe));
    t_s_ = t_e_;
    t_e_ = t_s_ + cfg_.period_length(h_) - 1;
  }

  while (next_row_ <= t - h_) {
    add_running_row(next_row_);
    ++next_row_;
  }
  refresh_running(t);
}

void CpdEstimator::record_perturbation(int t, const VectorXd& du) {
  require(t == static_cast<int>(dus_.size()) + 1,
          "cpd estimator: perturbations must arrive in order");
  require(du.size() == m_, "cpd estimator: input dimension mismatch");
  dus_.push_back(du);
}

const MarkovOperator& CpdEstimator::estimate(int t) {
  require(t == static_cast<int>(ys_.size()),
          "cpd estimator: estimate(t) follows observe_output(t)");
  return current_;
}

bool CpdEstimator::detection_at(int t) const {
  return !detection_times_.empty() && detection_times_.back() == t;
}

MarkovOperator random_feasible_G(const GBounds& bounds, int h, int p, int m,
                                 Rng& rng) {
  MarkovOperator G;
  G.blocks.reserve(h);
  for (int k = 1; k <= h; ++k) {
    MatrixXd X = rng.normal_matrix(p, m);
    Eigen::JacobiSVD<MatrixXd> svd(X);
    const double s = svd.singularValues()(0);
    const double target = bounds.block_bound(k) * rng.uniform();
    G.blocks.push_back(s > 0.0 ? MatrixXd(X * (target / s))
                               : MatrixXd::Zero(p, m));
  }
  return G;
}

RandomGEstimator::RandomGEstimator(const GBounds& bounds, int h, int p, int m,
                                   int period, std::uint64_t seed)
    : bounds_(bounds), h_(h), p_(p), m_(m), period_(period), rng_(seed) {
  require_config(period_ >= 1, "random estimator: period must be positive");
  redraw();
}

void RandomGEstimator::redraw() {
  current_ = random_feasible_G(bounds_, h_, p_, m_, rng_);
}

void RandomGEstimator::observe_output(int t, const VectorXd&) {
  if (t > 1 && (t - 1) % period_ == 0) redraw();
}

}  // namespace tvdac
