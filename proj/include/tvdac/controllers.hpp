#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "tvdac/dac.hpp"
#include "tvdac/estimation.hpp"
#include "tvdac/rollout.hpp"

namespace tvdac {

enum class ControllerKind {
  OlcFk,     // online gradient on the truncated cost, true operator known
  OlcZk,     // same loop with periodically re-estimated operator
  OlcZkCpd,  // estimation restarts driven by a change detector
  FixedM,    // frozen policy parameter
  RandomM,   // parameter redrawn uniformly every step
  FixedG,    // learning loop fed a frozen operator estimate
  RandomG,   // learning loop fed a random estimate each period
  OlcTi,     // explore-then-commit: one estimate, then frozen exploitation
};

std::string default_controller_name(ControllerKind kind);

struct ControllerSpec {
  ControllerKind kind = ControllerKind::OlcFk;
  std::string name;        // CSV identity; empty -> default_controller_name
  double eta = 0.4;        // gradient step size
  int h = 2;               // truncation length
  double kappa_M = 1.0;    // per-block parameter radius
  EstimatorConfig estimator;          // used by Zk/ZkCpd/FixedG/RandomG/OlcTi
  Setting setting = Setting::General; // offset-estimate history source
  bool random_init = false;           // FixedM: draw M_1 instead of zero
  int explore_steps = 0;              // OlcTi: 0 -> ceil(T^{2/3})

  bool uses_estimator() const;
  bool is_learning() const;  // runs gradient updates
  std::string resolved_name() const {
    return name.empty() ? default_controller_name(kind) : name;
  }
  void validate() const;
};

// Builds the policy for one episode.  The policy draws its private
// randomness from `seed`; FixedG uses `fixed_G` when given (test hook for
// supplying the true operator), otherwise a random feasible draw.
std::unique_ptr<Policy> make_policy(const ControllerSpec& spec,
                                    std::shared_ptr<const SystemPath> sys,
                                    std::shared_ptr<const DisturbanceRealization> dist,
                                    const VectorXd& x1, std::uint64_t seed,
                                    const MarkovOperator* fixed_G = nullptr);

}  // namespace tvdac
