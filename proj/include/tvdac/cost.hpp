#pragma once

#include <functional>
#include <vector>

#include "tvdac/types.hpp"

namespace tvdac {

enum class CostKind { Quadratic, Linear, Custom };

// Per-step cost c_t(y, u).  Quadratic: y'Qy + u'Ru with Q, R symmetric PSD.
// Linear: alpha_t' [y; u] with a per-step coefficient sequence.  Custom:
// arbitrary callables (gradient optional).
struct CostSpec {
  CostKind kind = CostKind::Quadratic;

  // Quadratic.
  MatrixXd Q;  // p x p
  MatrixXd R;  // m x m

  // Linear: alpha[t-1] has dimension p + m.
  std::vector<VectorXd> alpha;

  // Custom.
  std::function<double(const VectorXd&, const VectorXd&)> value_fn;
  std::function<void(const VectorXd&, const VectorXd&, VectorXd&, VectorXd&)>
      grad_fn;

  // Regularity constants: |c(z)-c(z')| <= lip * max(|z|,|z'|,1) * |z-z'| and
  // |grad c(z)| <= grad_bound * max(|z|, 1).  Filled by the factories below;
  // required by the learning-rate and gradient-bound formulas.
  double lip = 0.0;
  double grad_bound = 0.0;

  static CostSpec quadratic(MatrixXd Q, MatrixXd R);
  static CostSpec linear(std::vector<VectorXd> alpha);
  static CostSpec custom(
      std::function<double(const VectorXd&, const VectorXd&)> value,
      std::function<void(const VectorXd&, const VectorXd&, VectorXd&,
                         VectorXd&)>
          grad,
      double lip, double grad_bound);

  double value(int t, const VectorXd& y, const VectorXd& u) const;
  // Writes the partial gradients wrt y and u.  Throws UnsupportedCostError
  // for a custom cost without grad_fn.
  void grad(int t, const VectorXd& y, const VectorXd& u, VectorXd& gy,
            VectorXd& gu) const;
};

// The slice of a cost sequence revealed to a policy at one time step.  Keeps
// policies from peeking at future coefficients by construction.
class StepCost {
 public:
  StepCost(const CostSpec& spec, int t) : spec_(&spec), t_(t) {}

  double value(const VectorXd& y, const VectorXd& u) const {
    return spec_->value(t_, y, u);
  }
  void grad(const VectorXd& y, const VectorXd& u, VectorXd& gy,
            VectorXd& gu) const {
    spec_->grad(t_, y, u, gy, gu);
  }
  int t() const { return t_; }

 private:
  const CostSpec* spec_;
  int t_;
};

}  // namespace tvdac
