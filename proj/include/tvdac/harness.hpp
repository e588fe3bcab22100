#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tvdac/controllers.hpp"
#include "tvdac/regret.hpp"
#include "tvdac/rollout.hpp"

namespace tvdac {

enum class ExperimentMode {
  Experiments,  // config-supplied eta, h, N, sigma
  Theory,       // horizon-driven h, N, sigma and learning-rate rule
};

struct CostConfig {
  CostKind kind = CostKind::Quadratic;
  double scale = 1.0;         // scales the random PSD weights
  double linear_bound = 1.0;  // coefficient norm bound for linear costs
  bool has_explicit = false;  // use the given Q, R instead of random draws
  MatrixXd Q, R;
  void validate() const;
};

struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::Experiments;
  SystemConfig system;  // system.T is overridden by each entry of horizons
  DisturbanceConfig disturbance;
  CostConfig cost;
  std::vector<ControllerSpec> controllers;
  std::vector<long long> horizons{2000};
  int runs = 10;
  std::uint64_t base_seed = 12345;
  int gamma_T = 1;         // change budget driving the theory scalings
  double eta_scale = 1.0;  // calibration factor on the learning-rate rule

  void validate() const;
};

// JSON front end.  parse_config takes the raw document text.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// Per-(controller, horizon) aggregate over runs.
struct ControllerSeries {
  std::string name;
  long long T = 0;
  std::vector<double> regret_mean, regret_std, cost_mean, est_err_mean,
      detections_mean;  // indexed by t-1
  std::vector<double> final_regret_by_run;
  double final_regret_mean = 0.0, final_regret_std = 0.0;
};

struct AggregateResult {
  std::vector<ControllerSeries> series;       // controller-major, then T
  std::map<std::string, SlopeFit> slopes;     // only with >= 2 usable horizons
  std::string metadata_json;
};

// Episode-seed rule: run i uses base_seed + i; sub-streams are derived with
// mix_seed.  All controllers in a run share the system, disturbance, cost,
// and hindsight comparator.
AggregateResult run_experiment(const ExperimentConfig& cfg);

// Resolves theory-mode choices (h, N, sigma, eta) for one episode.  Exposed
// for tests; experiments mode returns the spec with defaults filled in.
ControllerSpec resolve_spec(const ControllerSpec& spec,
                            const ExperimentConfig& cfg, long long T,
                            const SystemPath& sys,
                            const DisturbanceRealization& dist,
                            const CostSpec& costs);

// Writes <name>_T<T>.csv per series plus summary.csv and metadata.json.
// All numeric values use %.9g; output is byte-deterministic for a fixed
// (config, seed).
void export_csv(const AggregateResult& result, const std::string& out_dir);

// Builds the per-episode cost spec (random PSD weights or per-step linear
// coefficients) from the cost stream seed.
CostSpec make_costs(const CostConfig& cfg, int p, int m, long long T,
                    std::uint64_t seed);

int cli_main(int argc, const char* const* argv);

}  // namespace tvdac
