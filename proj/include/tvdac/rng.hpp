#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "tvdac/types.hpp"

namespace tvdac {

// Deterministic random source.  std::mt19937_64 is fully specified by the
// standard; the transformations below are written out by hand because the
// std::*_distribution classes are implementation-defined and would break
// byte-reproducibility across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the spare value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  VectorXd normal_vector(int n, double stddev = 1.0) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = stddev * normal();
    return v;
  }

  MatrixXd normal_matrix(int rows, int cols, double stddev = 1.0) {
    MatrixXd m(rows, cols);
    // Row-major fill order so the draw sequence is part of the contract.
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = stddev * normal();
    return m;
  }

  // Uniform over the solid ball of the given radius (direction from a
  // normal draw, radius via the u^{1/n} inversion).
  VectorXd uniform_ball(int n, double radius) {
    VectorXd dir(n);
    double norm = 0.0;
    do {
      dir = normal_vector(n);
      norm = dir.norm();
    } while (norm == 0.0);
    const double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(n));
    return (r / norm) * dir;
  }

  // Uniform over the sphere of the given radius.
  VectorXd uniform_sphere(int n, double radius) {
    VectorXd dir(n);
    double norm = 0.0;
    do {
      dir = normal_vector(n);
      norm = dir.norm();
    } while (norm == 0.0);
    return (radius / norm) * dir;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 finalizer, used to derive independent sub-stream seeds from an
// episode seed.  Documented rule: episode i uses base_seed + i; within an
// episode, stream `id` uses mix_seed(episode_seed, id).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream_id + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Stable stream ids for the episode-level sub-streams.
namespace stream {
constexpr std::uint64_t kSystem = 1;
constexpr std::uint64_t kDisturbance = 2;
constexpr std::uint64_t kCost = 3;
constexpr std::uint64_t kComparator = 4;
constexpr std::uint64_t kControllerBase = 100;  // + controller index
}  // namespace stream

}  // namespace tvdac
