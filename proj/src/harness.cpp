#include "tvdac/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace tvdac {

using nlohmann::json;

void CostConfig::validate() const {
  require_config(scale > 0.0, "cost config: scale must be positive");
  require_config(linear_bound > 0.0,
                 "cost config: linear_bound must be positive");
  if (has_explicit) {
    require_config(kind == CostKind::Quadratic,
                   "cost config: explicit matrices only apply to quadratic");
    require_config(Q.rows() == Q.cols() && R.rows() == R.cols(),
                   "cost config: explicit Q and R must be square");
  }
}

void ExperimentConfig::validate() const {
  require_config(!controllers.empty(), "config: no controllers given");
  require_config(!horizons.empty(), "config: no horizons given");
  for (long long T : horizons)
    require_config(T >= 1 && T <= std::numeric_limits<int>::max(),
                   "config: horizons must be positive 32-bit values");

  // system.T is driven by the horizon list at run time, so check the config
  // (change times in particular) against the shortest horizon it will see.
  SystemConfig sys_check = system;
  sys_check.T = static_cast<int>(
      *std::min_element(horizons.begin(), horizons.end()));
  sys_check.validate();
  disturbance.validate();
  cost.validate();
  require_config(runs >= 1, "config: runs must be positive");
  require_config(gamma_T >= 1, "config: gamma_T must be at least 1");
  require_config(eta_scale > 0.0, "config: eta_scale must be positive");
  if (cost.has_explicit)
    require_config(cost.Q.rows() == system.p && cost.R.rows() == system.m,
                   "config: explicit cost matrices must match output/input "
                   "dimensions");

  std::vector<std::string> names;
  for (const auto& c : controllers) {
    c.validate();
    const std::string name = c.resolved_name();
    require_config(!name.empty(), "config: controller name empty");
    for (char ch : name)
      require_config(std::isalnum(static_cast<unsigned char>(ch)) ||
                         ch == '-' || ch == '_',
                     "config: controller name '" + name +
                         "' may only contain [A-Za-z0-9_-]");
    require_config(std::find(names.begin(), names.end(), name) == names.end(),
                   "config: duplicate controller name '" + name + "'");
    names.push_back(name);
    if (c.setting == Setting::Matched)
      require_config(system.q == system.m,
                     "config: matched setting needs q == m");
  }
}

namespace {

[[noreturn]] void bad_key(const std::string& where, const std::string& key) {
  throw ConfigError("config: unknown key '" + key + "' in " + where);
}

void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& where) {
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      bad_key(where, item.key());
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: bad value for '") + key + "'");
  }
}

MatrixXd parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ConfigError("config: " + where + " must be an array of rows");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  MatrixXd M(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols)
      throw ConfigError("config: " + where + " rows have unequal length");
    for (int c = 0; c < cols; ++c) M(r, c) = j[r][c].get<double>();
  }
  return M;
}

Schedule parse_schedule(const std::string& s) {
  if (s == "constant") return Schedule::Constant;
  if (s == "piecewise") return Schedule::Piecewise;
  if (s == "per-step-random") return Schedule::PerStepRandom;
  throw ConfigError("config: unknown schedule '" + s + "'");
}

DisturbanceChannel parse_channel(const std::string& s) {
  if (s == "identity") return DisturbanceChannel::Identity;
  if (s == "match-b") return DisturbanceChannel::MatchB;
  if (s == "random") return DisturbanceChannel::Random;
  throw ConfigError("config: unknown disturbance channel '" + s + "'");
}

DisturbanceConfig::Kind parse_dist_kind(const std::string& s) {
  if (s == "uniform-ball") return DisturbanceConfig::Kind::UniformBall;
  if (s == "sinusoid") return DisturbanceConfig::Kind::Sinusoid;
  if (s == "constant") return DisturbanceConfig::Kind::Constant;
  throw ConfigError("config: unknown disturbance kind '" + s + "'");
}

ControllerKind parse_controller_kind(const std::string& s) {
  if (s == "olc-fk") return ControllerKind::OlcFk;
  if (s == "olc-zk") return ControllerKind::OlcZk;
  if (s == "olc-zk-cpd") return ControllerKind::OlcZkCpd;
  if (s == "fixed-m") return ControllerKind::FixedM;
  if (s == "random-m") return ControllerKind::RandomM;
  if (s == "fixed-g") return ControllerKind::FixedG;
  if (s == "random-g") return ControllerKind::RandomG;
  if (s == "olc-ti") return ControllerKind::OlcTi;
  throw ConfigError("config: unknown controller kind '" + s + "'");
}

Setting parse_setting(const std::string& s) {
  if (s == "matched") return Setting::Matched;
  if (s == "general") return Setting::General;
  throw ConfigError("config: unknown setting '" + s + "'");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(j,
             {"mode", "system", "disturbance", "cost", "controllers",
              "horizons", "runs", "base_seed", "gamma_T", "eta_scale"},
             "top level");

  ExperimentConfig cfg;
  const std::string mode = get_or<std::string>(j, "mode", "experiments");
  if (mode == "experiments")
    cfg.mode = ExperimentMode::Experiments;
  else if (mode == "theory")
    cfg.mode = ExperimentMode::Theory;
  else
    throw ConfigError("config: unknown mode '" + mode + "'");

  if (j.contains("system")) {
    const json& js = j.at("system");
    check_keys(js,
               {"n", "m", "p", "q", "gamma", "kappa_b", "schedule",
                "change_times", "constant_C", "channel"},
               "system");
    cfg.system.n = get_or(js, "n", cfg.system.n);
    cfg.system.m = get_or(js, "m", cfg.system.m);
    cfg.system.p = get_or(js, "p", cfg.system.p);
    cfg.system.q = get_or(js, "q", cfg.system.q);
    cfg.system.gamma = get_or(js, "gamma", cfg.system.gamma);
    cfg.system.kappa_b = get_or(js, "kappa_b", cfg.system.kappa_b);
    cfg.system.schedule =
        parse_schedule(get_or<std::string>(js, "schedule", "constant"));
    cfg.system.change_times =
        get_or(js, "change_times", std::vector<int>{});
    cfg.system.constant_C = get_or(js, "constant_C", true);
    cfg.system.channel =
        parse_channel(get_or<std::string>(js, "channel", "identity"));
  }

  if (j.contains("disturbance")) {
    const json& jd = j.at("disturbance");
    check_keys(jd, {"kind", "kappa_w", "kappa_e", "period"}, "disturbance");
    cfg.disturbance.kind =
        parse_dist_kind(get_or<std::string>(jd, "kind", "uniform-ball"));
    cfg.disturbance.kappa_w = get_or(jd, "kappa_w", cfg.disturbance.kappa_w);
    cfg.disturbance.kappa_e = get_or(jd, "kappa_e", cfg.disturbance.kappa_e);
    cfg.disturbance.period = get_or(jd, "period", cfg.disturbance.period);
  }

  if (j.contains("cost")) {
    const json& jc = j.at("cost");
    check_keys(jc, {"kind", "scale", "linear_bound", "Q", "R"}, "cost");
    const std::string kind = get_or<std::string>(jc, "kind", "quadratic");
    if (kind == "quadratic")
      cfg.cost.kind = CostKind::Quadratic;
    else if (kind == "linear")
      cfg.cost.kind = CostKind::Linear;
    else
      throw ConfigError("config: unknown cost kind '" + kind + "'");
    cfg.cost.scale = get_or(jc, "scale", cfg.cost.scale);
    cfg.cost.linear_bound = get_or(jc, "linear_bound", cfg.cost.linear_bound);
    if (jc.contains("Q") || jc.contains("R")) {
      require_config(jc.contains("Q") && jc.contains("R"),
                     "config: explicit cost needs both Q and R");
      cfg.cost.has_explicit = true;
      cfg.cost.Q = parse_matrix(jc.at("Q"), "cost.Q");
      cfg.cost.R = parse_matrix(jc.at("R"), "cost.R");
    }
  }

  if (j.contains("controllers")) {
    if (!j.at("controllers").is_array())
      throw ConfigError("config: controllers must be an array");
    for (const json& jc : j.at("controllers")) {
      check_keys(jc,
                 {"kind", "name", "eta", "h", "kappa_M", "setting",
                  "random_init", "explore_steps", "estimator"},
                 "controller");
      ControllerSpec spec;
      if (!jc.contains("kind"))
        throw ConfigError("config: controller entry missing 'kind'");
      spec.kind = parse_controller_kind(jc.at("kind").get<std::string>());
      spec.name = get_or<std::string>(jc, "name", "");
      spec.eta = get_or(jc, "eta", spec.eta);
      spec.h = get_or(jc, "h", spec.h);
      spec.kappa_M = get_or(jc, "kappa_M", spec.kappa_M);
      spec.setting = parse_setting(get_or<std::string>(jc, "setting", "general"));
      spec.random_init = get_or(jc, "random_init", false);
      spec.explore_steps = get_or(jc, "explore_steps", 0);
      if (jc.contains("estimator")) {
        const json& je = jc.at("estimator");
        check_keys(je, {"N", "lambda", "sigma", "delta", "beta_override"},
                   "estimator");
        spec.estimator.N = get_or(je, "N", spec.estimator.N);
        spec.estimator.lambda = get_or(je, "lambda", spec.estimator.lambda);
        spec.estimator.sigma = get_or(je, "sigma", spec.estimator.sigma);
        spec.estimator.delta = get_or(je, "delta", spec.estimator.delta);
        spec.estimator.beta_override =
            get_or(je, "beta_override", spec.estimator.beta_override);
      }
      cfg.controllers.push_back(std::move(spec));
    }
  }

  cfg.horizons = get_or(j, "horizons", cfg.horizons);
  cfg.runs = get_or(j, "runs", cfg.runs);
  cfg.base_seed = get_or(j, "base_seed", cfg.base_seed);
  cfg.gamma_T = get_or(j, "gamma_T", cfg.gamma_T);
  cfg.eta_scale = get_or(j, "eta_scale", cfg.eta_scale);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

CostSpec make_costs(const CostConfig& cfg, int p, int m, long long T,
                    std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  switch (cfg.kind) {
    case CostKind::Quadratic: {
      if (cfg.has_explicit) return CostSpec::quadratic(cfg.Q, cfg.R);
      const MatrixXd X = rng.normal_matrix(p, p);
      const MatrixXd Y = rng.normal_matrix(m, m);
      return CostSpec::quadratic(cfg.scale * (X.transpose() * X) / p,
                                 cfg.scale * (Y.transpose() * Y) / m);
    }
    case CostKind::Linear: {
      std::vector<VectorXd> alpha;
      alpha.reserve(T);
      for (long long t = 0; t < T; ++t)
        alpha.push_back(rng.uniform_ball(p + m, cfg.linear_bound));
      return CostSpec::linear(std::move(alpha));
    }
    case CostKind::Custom:
      break;
  }
  throw ConfigError("cost config: unsupported kind");
}

ControllerSpec resolve_spec(const ControllerSpec& spec,
                            const ExperimentConfig& cfg, long long T,
                            const SystemPath& sys,
                            const DisturbanceRealization& dist,
                            const CostSpec& costs) {
  ControllerSpec r = spec;
  if (cfg.mode != ExperimentMode::Theory) return r;

  r.h = theoretical_history(static_cast<int>(T), sys.gamma);
  const TheoreticalScalings sc = theoretical_scalings(cfg.gamma_T, T, r.h);
  require_config(sc.N <= std::numeric_limits<int>::max(),
                 "theory mode: N overflows int");
  r.estimator.N = static_cast<int>(sc.N);
  r.estimator.sigma = sc.sigma;

  OcoConstantsInput in;
  in.kappa_a = sys.kappa_a;
  in.kappa_b = sys.kappa_b;
  in.kappa_w = dist.kappa_w;
  in.kappa_e = dist.kappa_e;
  in.kappa_M = spec.kappa_M;
  in.gamma = sys.gamma;
  in.lip = costs.lip;
  in.grad_bound = costs.grad_bound;
  in.h = r.h;
  in.n = sys.n;
  in.m = sys.m;
  r.eta = cfg.eta_scale *
          theoretical_learning_rate(compute_oco_constants(in), r.h,
                                    static_cast<int>(T));
  return r;
}

namespace {

struct SeriesAccumulator {
  long long T = 0;
  std::vector<double> regret_sum, regret_sumsq, cost_sum, est_err_sum,
      det_sum;
  std::vector<double> finals;

  void init(long long horizon) {
    T = horizon;
    regret_sum.assign(T, 0.0);
    regret_sumsq.assign(T, 0.0);
    cost_sum.assign(T, 0.0);
    est_err_sum.assign(T, 0.0);
    det_sum.assign(T, 0.0);
  }

  void add(const EpisodeTrace& trace, const RegretSeries& rs) {
    double det_cum = 0.0;
    for (long long i = 0; i < T; ++i) {
      regret_sum[i] += rs.cumulative[i];
      regret_sumsq[i] += rs.cumulative[i] * rs.cumulative[i];
      cost_sum[i] += trace.cost[i];
      est_err_sum[i] += trace.est_err[i];
      det_cum += trace.detection[i];
      det_sum[i] += det_cum;
    }
    finals.push_back(rs.final_regret);
  }

  ControllerSeries finish(const std::string& name) const {
    const double n = static_cast<double>(finals.size());
    ControllerSeries s;
    s.name = name;
    s.T = T;
    s.regret_mean.resize(T);
    s.regret_std.resize(T);
    s.cost_mean.resize(T);
    s.est_err_mean.resize(T);
    s.detections_mean.resize(T);
    for (long long i = 0; i < T; ++i) {
      const double mean = regret_sum[i] / n;
      const double var = std::max(0.0, regret_sumsq[i] / n - mean * mean);
      s.regret_mean[i] = mean;
      s.regret_std[i] = std::sqrt(var);
      s.cost_mean[i] = cost_sum[i] / n;
      s.est_err_mean[i] = est_err_sum[i] / n;
      s.detections_mean[i] = det_sum[i] / n;
    }
    s.final_regret_by_run = finals;
    s.final_regret_mean = s.regret_mean[T - 1];
    s.final_regret_std = s.regret_std[T - 1];
    return s;
  }
};

}  // namespace

AggregateResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const int numC = static_cast<int>(cfg.controllers.size());
  const int numT = static_cast<int>(cfg.horizons.size());
  std::vector<SeriesAccumulator> acc(numC * numT);
  for (int ci = 0; ci < numC; ++ci)
    for (int ti = 0; ti < numT; ++ti)
      acc[ci * numT + ti].init(cfg.horizons[ti]);

  json meta;
  meta["mode"] =
      cfg.mode == ExperimentMode::Theory ? "theory" : "experiments";
  meta["runs"] = cfg.runs;
  meta["base_seed"] = cfg.base_seed;
  meta["horizons"] = cfg.horizons;
  meta["gamma"] = cfg.system.gamma;
  meta["kappa_b"] = cfg.system.kappa_b;
  meta["kappa_w"] = cfg.disturbance.kappa_w;
  meta["kappa_e"] = cfg.disturbance.kappa_e;
  if (cfg.mode == ExperimentMode::Theory) meta["gamma_T"] = cfg.gamma_T;
  json per_horizon = json::array();

  for (int ti = 0; ti < numT; ++ti) {
    const long long T = cfg.horizons[ti];
    json jh;
    jh["T"] = T;
    json kappa_a_list = json::array();
    json resolved_list = json::array();

    for (int run = 0; run < cfg.runs; ++run) {
      const std::uint64_t eseed = cfg.base_seed + static_cast<std::uint64_t>(run);
      SystemConfig scfg = cfg.system;
      scfg.T = static_cast<int>(T);
      auto sys = std::make_shared<const SystemPath>(
          generate_system(scfg, mix_seed(eseed, stream::kSystem)));
      auto dist = std::make_shared<const DisturbanceRealization>(
          generate_disturbance(cfg.disturbance, scfg.T, scfg.q, scfg.p,
                               mix_seed(eseed, stream::kDisturbance)));
      auto costs = std::make_shared<const CostSpec>(make_costs(
          cfg.cost, scfg.p, scfg.m, T, mix_seed(eseed, stream::kCost)));
      const VectorXd x1 = VectorXd::Zero(scfg.n);
      kappa_a_list.push_back(sys->kappa_a);

      std::map<std::pair<int, double>, ComparatorResult> comparators;
      for (int ci = 0; ci < numC; ++ci) {
        const ControllerSpec rspec =
            resolve_spec(cfg.controllers[ci], cfg, T, *sys, *dist, *costs);
        if (run == 0) {
          json jr;
          jr["name"] = rspec.resolved_name();
          jr["h"] = rspec.h;
          jr["eta"] = rspec.eta;
          if (rspec.uses_estimator()) {
            jr["N"] = rspec.estimator.N;
            jr["sigma"] = rspec.estimator.sigma;
            jr["lambda"] = rspec.estimator.lambda;
          }
          resolved_list.push_back(std::move(jr));
        }

        const std::pair<int, double> key{rspec.h, rspec.kappa_M};
        auto it = comparators.find(key);
        if (it == comparators.end()) {
          ComparatorOptions opts;
          opts.seed = eseed;
          it = comparators
                   .emplace(key, best_dac_in_hindsight(*sys, *dist, *costs,
                                                       rspec.h, rspec.kappa_M,
                                                       opts, &x1))
                   .first;
        }

        auto policy = make_policy(
            rspec, sys, dist, x1,
            mix_seed(eseed, stream::kControllerBase +
                                static_cast<std::uint64_t>(ci)));
        const EpisodeTrace trace = rollout(sys, dist, costs, *policy, x1);
        const RegretSeries rs = regret_series(trace.cost, it->second.costs);
        acc[ci * numT + ti].add(trace, rs);
      }
    }
    jh["kappa_a"] = std::move(kappa_a_list);
    jh["resolved_controllers"] = std::move(resolved_list);
    per_horizon.push_back(std::move(jh));
  }
  meta["per_horizon"] = std::move(per_horizon);

  AggregateResult out;
  for (int ci = 0; ci < numC; ++ci)
    for (int ti = 0; ti < numT; ++ti)
      out.series.push_back(
          acc[ci * numT + ti].finish(cfg.controllers[ci].resolved_name()));

  for (int ci = 0; ci < numC; ++ci) {
    std::vector<std::pair<double, double>> points;
    for (int ti = 0; ti < numT; ++ti) {
      const ControllerSeries& s = out.series[ci * numT + ti];
      points.emplace_back(static_cast<double>(s.T), s.final_regret_mean);
    }
    if (points.size() < 2) continue;
    try {
      out.slopes[cfg.controllers[ci].resolved_name()] =
          fit_scaling_exponent(points);
    } catch (const InsufficientDataError&) {
      // nonpositive mean regrets: no usable fit for this controller
    }
  }

  json jslopes = json::object();
  for (const auto& [name, fit] : out.slopes) {
    jslopes[name] = {{"slope", fit.slope},
                     {"stderr", fit.stderr_slope},
                     {"points", fit.points}};
  }
  meta["scaling_slopes"] = std::move(jslopes);
  out.metadata_json = meta.dump(2) + "\n";
  return out;
}

void export_csv(const AggregateResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  for (const ControllerSeries& s : result.series) {
    const fs::path path =
        fs::path(out_dir) / (s.name + "_T" + std::to_string(s.T) + ".csv");
    std::ofstream f(path);
    require(static_cast<bool>(f), "export: cannot write " + path.string());
    f << "t,regret_mean,regret_std,cost_mean,est_err_mean,detections_mean\n";
    for (long long i = 0; i < s.T; ++i) {
      f << (i + 1) << ',' << format_double(s.regret_mean[i]) << ','
        << format_double(s.regret_std[i]) << ','
        << format_double(s.cost_mean[i]) << ','
        << format_double(s.est_err_mean[i]) << ','
        << format_double(s.detections_mean[i]) << '\n';
    }
  }

  const fs::path sum_path = fs::path(out_dir) / "summary.csv";
  std::ofstream f(sum_path);
  require(static_cast<bool>(f), "export: cannot write " + sum_path.string());
  f << "controller,T,final_regret_mean,final_regret_std,scaling_slope\n";
  for (const ControllerSeries& s : result.series) {
    const auto it = result.slopes.find(s.name);
    const double slope = it == result.slopes.end()
                             ? std::numeric_limits<double>::quiet_NaN()
                             : it->second.slope;
    f << s.name << ',' << s.T << ',' << format_double(s.final_regret_mean)
      << ',' << format_double(s.final_regret_std) << ','
      << format_double(slope) << '\n';
  }

  std::ofstream m(fs::path(out_dir) / "metadata.json");
  require(static_cast<bool>(m), "export: cannot write metadata.json");
  m << result.metadata_json;
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"online control of unknown time-varying linear systems"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::vector<long long> horizons;
  std::int64_t seed_override = -1;
  int runs_override = 0;

  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", config_path, "JSON experiment config")
        ->required();
    if (needs_out)
      sub->add_option("--out", out_dir, "output directory for CSV files")
          ->required();
    sub->add_option("--seed", seed_override, "override base_seed");
    sub->add_option("--runs", runs_override, "override number of runs");
    sub->add_option("--horizons", horizons,
                    "override horizon list (comma separated)")
        ->delimiter(',');
  };

  CLI::App* cmd_run = app.add_subcommand("run", "run the configured episode set");
  add_common(cmd_run, true);
  CLI::App* cmd_sweep =
      app.add_subcommand("sweep", "run across a list of horizons");
  add_common(cmd_sweep, true);
  CLI::App* cmd_compare = app.add_subcommand(
      "compare", "run the configured controllers side by side");
  add_common(cmd_compare, true);
  CLI::App* cmd_validate =
      app.add_subcommand("validate", "check a config and exit");
  add_common(cmd_validate, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    ExperimentConfig cfg = load_config(config_path);
    if (seed_override >= 0)
      cfg.base_seed = static_cast<std::uint64_t>(seed_override);
    if (runs_override > 0) cfg.runs = runs_override;
    if (!horizons.empty()) cfg.horizons = horizons;
    cfg.validate();

    if (cmd_validate->parsed()) {
      std::cout << "config ok: " << cfg.controllers.size() << " controllers, "
                << cfg.horizons.size() << " horizon(s), " << cfg.runs
                << " run(s)\n";
      return 0;
    }
    if (cmd_sweep->parsed() && cfg.horizons.size() < 2) {
      std::cerr << "sweep: need at least two horizons\n";
      return 1;
    }
    if (cmd_compare->parsed() && cfg.controllers.size() < 2) {
      std::cerr << "compare: need at least two controllers\n";
      return 1;
    }

    const AggregateResult result = run_experiment(cfg);
    export_csv(result, out_dir);

    for (const ControllerSeries& s : result.series) {
      std::cout << s.name << " T=" << s.T
                << " final_regret_mean=" << format_double(s.final_regret_mean)
                << " final_regret_std=" << format_double(s.final_regret_std)
                << "\n";
    }
    for (const auto& [name, fit] : result.slopes) {
      std::cout << name << " scaling_slope=" << format_double(fit.slope)
                << " stderr=" << format_double(fit.stderr_slope) << "\n";
    }
    std::cout << "wrote " << out_dir << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace tvdac
