#include "tvdac/cost.hpp"

#include <Eigen/Eigenvalues>

namespace tvdac {

CostSpec CostSpec::quadratic(MatrixXd Q, MatrixXd R) {
  require_config(Q.rows() == Q.cols() && R.rows() == R.cols(),
                 "quadratic cost: Q and R must be square");
  CostSpec c;
  c.kind = CostKind::Quadratic;
  // Symmetrize so value and gradient agree regardless of the input's skew part.
  c.Q = 0.5 * (Q + Q.transpose());
  c.R = 0.5 * (R + R.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eq(c.Q), er(c.R);
  const double lq = eq.eigenvalues().cwiseAbs().maxCoeff();
  const double lr = er.eigenvalues().cwiseAbs().maxCoeff();
  require_config(eq.eigenvalues().minCoeff() > -1e-12 &&
                     er.eigenvalues().minCoeff() > -1e-12,
                 "quadratic cost: Q and R must be PSD");
  // |z'Az - z''Az'| <= lmax |z-z'| |z+z'| gives lip = 2 lmax on the joint
  // (y,u) variable; the gradient 2*blkdiag(Q,R)z obeys the same constant.
  c.lip = 2.0 * std::max(lq, lr);
  c.grad_bound = c.lip;
  return c;
}

CostSpec CostSpec::linear(std::vector<VectorXd> alpha) {
  require_config(!alpha.empty(), "linear cost: empty coefficient sequence");
  CostSpec c;
  c.kind = CostKind::Linear;
  double amax = 0.0;
  for (const auto& a : alpha) amax = std::max(amax, a.norm());
  c.alpha = std::move(alpha);
  c.lip = amax;
  c.grad_bound = amax;
  return c;
}

CostSpec CostSpec::custom(
    std::function<double(const VectorXd&, const VectorXd&)> value,
    std::function<void(const VectorXd&, const VectorXd&, VectorXd&, VectorXd&)>
        grad,
    double lip, double grad_bound) {
  require_config(static_cast<bool>(value), "custom cost: missing value_fn");
  CostSpec c;
  c.kind = CostKind::Custom;
  c.value_fn = std::move(value);
  c.grad_fn = std::move(grad);
  c.lip = lip;
  c.grad_bound = grad_bound;
  return c;
}

double CostSpec::value(int t, const VectorXd& y, const VectorXd& u) const {
  switch (kind) {
    case CostKind::Quadratic:
      require(y.size() == Q.rows() && u.size() == R.rows(),
              "cost value: dimension mismatch");
      return y.dot(Q * y) + u.dot(R * u);
    case CostKind::Linear: {
      require(t >= 1 && t <= static_cast<int>(alpha.size()),
              "cost value: t outside coefficient sequence");
      const VectorXd& a = alpha[t - 1];
      require(a.size() == y.size() + u.size(),
              "cost value: dimension mismatch");
      return a.head(y.size()).dot(y) + a.tail(u.size()).dot(u);
    }
    case CostKind::Custom:
      return value_fn(y, u);
  }
  throw ContractError("cost value: unknown kind");
}

void CostSpec::grad(int t, const VectorXd& y, const VectorXd& u, VectorXd& gy,
                    VectorXd& gu) const {
  switch (kind) {
    case CostKind::Quadratic:
      require(y.size() == Q.rows() && u.size() == R.rows(),
              "cost grad: dimension mismatch");
      gy = 2.0 * (Q * y);
      gu = 2.0 * (R * u);
      return;
    case CostKind::Linear: {
      require(t >= 1 && t <= static_cast<int>(alpha.size()),
              "cost grad: t outside coefficient sequence");
      const VectorXd& a = alpha[t - 1];
      require(a.size() == y.size() + u.size(), "cost grad: dimension mismatch");
      gy = a.head(y.size());
      gu = a.tail(u.size());
      return;
    }
    case CostKind::Custom:
      if (!grad_fn)
        throw UnsupportedCostError("custom cost: gradient not provided");
      grad_fn(y, u, gy, gu);
      return;
  }
  throw ContractError("cost grad: unknown kind");
}

}  // namespace tvdac
