#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace tvdac {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Invalid configuration values (bad dimensions, out-of-range constants, ...).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A caller broke an interface contract (dimension mismatch, bad call order).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// Normal equations are singular and no ridge term was supplied.
struct SingularSystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cost kind does not support the requested operation (e.g. no gradient).
struct UnsupportedCostError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Not enough data points to perform the computation.
struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractError(what);
}

// Ceiling that first snaps values within eps of an integer onto it, so that
// analytically integral expressions (e.g. exact powers) do not round up from
// floating-point noise.
inline long long snapped_ceil(double x, double eps = 1e-9) {
  const double r = std::round(x);
  if (std::abs(x - r) <= eps) return static_cast<long long>(r);
  return static_cast<long long>(std::ceil(x));
}

inline void require_config(bool cond, const std::string& what) {
  if (!cond) throw ConfigError(what);
}

}  // namespace tvdac
