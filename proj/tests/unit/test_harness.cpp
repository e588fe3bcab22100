#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tvdac/harness.hpp"

using namespace tvdac;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE_MESSAGE(f.good(), "cannot open " << p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream f(p, std::ios::binary);
  f << text;
  return p;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("tvdac");
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

// A small two-controller experiment used by several cases below.
ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.system.n = 2;
  cfg.system.m = 2;
  cfg.system.p = 2;
  cfg.system.q = 2;
  cfg.system.gamma = 0.5;
  cfg.disturbance.kappa_w = 0.8;
  ControllerSpec fk;
  fk.kind = ControllerKind::OlcFk;
  fk.eta = 0.3;
  fk.h = 2;
  ControllerSpec fm;
  fm.kind = ControllerKind::FixedM;
  cfg.controllers = {fk, fm};
  cfg.horizons = {30};
  cfg.runs = 2;
  cfg.base_seed = 4242;
  return cfg;
}

const char* kFullDoc = R"({
  "mode": "experiments",
  "system": {"n": 2, "m": 2, "p": 2, "q": 2, "gamma": 0.4, "kappa_b": 0.9,
             "schedule": "piecewise", "change_times": [10], "constant_C": true,
             "channel": "random"},
  "disturbance": {"kind": "sinusoid", "kappa_w": 0.7, "kappa_e": 0.05,
                  "period": 25.0},
  "cost": {"kind": "quadratic", "scale": 0.5},
  "controllers": [
    {"kind": "olc-zk-cpd", "name": "detector", "eta": 0.3, "h": 2,
     "kappa_M": 0.8, "setting": "matched",
     "estimator": {"N": 6, "lambda": 0.01, "sigma": 0.25, "delta": 0.1,
                   "beta_override": 5.0}},
    {"kind": "fixed-m", "random_init": true},
    {"kind": "olc-ti", "explore_steps": 9}
  ],
  "horizons": [40, 80],
  "runs": 3,
  "base_seed": 777,
  "gamma_T": 2,
  "eta_scale": 0.5
})";

}  // namespace

TEST_CASE("config parser round-trips every field") {
  const ExperimentConfig cfg = parse_config(kFullDoc);
  cfg.validate();

  CHECK(cfg.mode == ExperimentMode::Experiments);
  CHECK(cfg.system.n == 2);
  CHECK(cfg.system.m == 2);
  CHECK(cfg.system.p == 2);
  CHECK(cfg.system.q == 2);
  CHECK(cfg.system.gamma == doctest::Approx(0.4));
  CHECK(cfg.system.kappa_b == doctest::Approx(0.9));
  CHECK(cfg.system.schedule == Schedule::Piecewise);
  REQUIRE(cfg.system.change_times.size() == 1);
  CHECK(cfg.system.change_times[0] == 10);
  CHECK(cfg.system.constant_C);
  CHECK(cfg.system.channel == DisturbanceChannel::Random);

  CHECK(cfg.disturbance.kind == DisturbanceConfig::Kind::Sinusoid);
  CHECK(cfg.disturbance.kappa_w == doctest::Approx(0.7));
  CHECK(cfg.disturbance.kappa_e == doctest::Approx(0.05));
  CHECK(cfg.disturbance.period == doctest::Approx(25.0));

  CHECK(cfg.cost.kind == CostKind::Quadratic);
  CHECK(cfg.cost.scale == doctest::Approx(0.5));
  CHECK_FALSE(cfg.cost.has_explicit);

  REQUIRE(cfg.controllers.size() == 3);
  const ControllerSpec& c0 = cfg.controllers[0];
  CHECK(c0.kind == ControllerKind::OlcZkCpd);
  CHECK(c0.resolved_name() == "detector");
  CHECK(c0.eta == doctest::Approx(0.3));
  CHECK(c0.h == 2);
  CHECK(c0.kappa_M == doctest::Approx(0.8));
  CHECK(c0.setting == Setting::Matched);
  CHECK(c0.estimator.N == 6);
  CHECK(c0.estimator.lambda == doctest::Approx(0.01));
  CHECK(c0.estimator.sigma == doctest::Approx(0.25));
  CHECK(c0.estimator.delta == doctest::Approx(0.1));
  CHECK(c0.estimator.beta_override == doctest::Approx(5.0));
  CHECK(cfg.controllers[1].random_init);
  CHECK(cfg.controllers[1].resolved_name() == "fixed-m");
  CHECK(cfg.controllers[2].explore_steps == 9);

  REQUIRE(cfg.horizons.size() == 2);
  CHECK(cfg.horizons[0] == 40);
  CHECK(cfg.horizons[1] == 80);
  CHECK(cfg.runs == 3);
  CHECK(cfg.base_seed == 777);
  CHECK(cfg.gamma_T == 2);
  CHECK(cfg.eta_scale == doctest::Approx(0.5));
}

TEST_CASE("config parser rejects malformed documents") {
  CHECK_THROWS_AS(parse_config("not json at all"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"colour": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"system": {"dims": 3}})"), ConfigError);
  CHECK_THROWS_AS(
      parse_config(R"({"system": {"schedule": "weekly"}})"), ConfigError);
  CHECK_THROWS_AS(
      parse_config(R"({"controllers": [{"kind": "pid"}]})"), ConfigError);
  CHECK_THROWS_AS(
      parse_config(
          R"({"controllers": [{"kind": "olc-zk", "estimator": {"width": 2}}]})"),
      ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"runs": "three"})"), ConfigError);
  // Explicit cost matrices come as a pair or not at all.
  CHECK_THROWS_AS(
      parse_config(R"({"cost": {"kind": "quadratic", "Q": [[1.0]]}})"),
      ConfigError);
}

TEST_CASE("config validation rejects inconsistent setups") {
  // Duplicate resolved names.
  CHECK_THROWS_AS(
      parse_config(
          R"({"controllers": [{"kind": "fixed-m"}, {"kind": "fixed-m"}]})")
          .validate(),
      ConfigError);
  // Names feed file paths, so the charset is restricted.
  CHECK_THROWS_AS(
      parse_config(
          R"({"controllers": [{"kind": "fixed-m", "name": "bad name!"}]})")
          .validate(),
      ConfigError);
  // Matched setting requires the disturbance width to equal the input width.
  CHECK_THROWS_AS(
      parse_config(
          R"({"system": {"q": 3, "m": 2, "n": 3, "p": 2},
              "controllers": [{"kind": "olc-zk", "setting": "matched"}]})")
          .validate(),
      ConfigError);
  ExperimentConfig cfg = tiny_config();
  cfg.runs = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = tiny_config();
  cfg.horizons.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  // Change times are checked against the shortest horizon, not the default
  // system.T placeholder.
  cfg = tiny_config();
  cfg.system.schedule = Schedule::Piecewise;
  cfg.system.change_times = {601};
  cfg.horizons = {1200};
  cfg.validate();  // fine: 601 < 1200
  cfg.horizons = {500, 1200};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("cost factory draws deterministic PSD weights") {
  CostConfig cc;
  cc.kind = CostKind::Quadratic;
  cc.scale = 0.5;
  const CostSpec a = make_costs(cc, 3, 2, 10, 909);
  const CostSpec b = make_costs(cc, 3, 2, 10, 909);
  const CostSpec c = make_costs(cc, 3, 2, 10, 910);
  CHECK((a.Q - b.Q).norm() == 0.0);
  CHECK((a.R - b.R).norm() == 0.0);
  CHECK((a.Q - c.Q).norm() > 0.0);

  CHECK((a.Q - a.Q.transpose()).norm() < 1e-12);
  CHECK((a.R - a.R.transpose()).norm() < 1e-12);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eq(a.Q), er(a.R);
  CHECK(eq.eigenvalues().minCoeff() >= -1e-12);
  CHECK(er.eigenvalues().minCoeff() >= -1e-12);
  CHECK(a.lip > 0.0);
  CHECK(a.grad_bound > 0.0);
}

TEST_CASE("cost factory honors explicit matrices and linear bounds") {
  CostConfig cc;
  cc.kind = CostKind::Quadratic;
  cc.has_explicit = true;
  cc.Q = 2.0 * MatrixXd::Identity(2, 2);
  cc.R = 0.5 * MatrixXd::Identity(2, 2);
  const CostSpec spec = make_costs(cc, 2, 2, 5, 1);
  CHECK((spec.Q - cc.Q).norm() == 0.0);
  CHECK((spec.R - cc.R).norm() == 0.0);

  CostConfig lc;
  lc.kind = CostKind::Linear;
  lc.linear_bound = 0.3;
  const CostSpec lin = make_costs(lc, 3, 2, 12, 77);
  CHECK(lin.kind == CostKind::Linear);
  REQUIRE(lin.alpha.size() == 12);
  for (const VectorXd& a : lin.alpha) {
    CHECK(a.size() == 5);
    CHECK(a.norm() <= 0.3 + 1e-12);
  }
  const CostSpec lin2 = make_costs(lc, 3, 2, 12, 77);
  CHECK((lin.alpha[5] - lin2.alpha[5]).norm() == 0.0);
}

TEST_CASE("spec resolution is a no-op outside theory mode") {
  ExperimentConfig cfg = tiny_config();
  const SystemConfig scfg = [&] {
    SystemConfig s = cfg.system;
    s.T = 50;
    return s;
  }();
  const SystemPath sys = generate_system(scfg, 1);
  const DisturbanceRealization dist =
      generate_disturbance(cfg.disturbance, 50, scfg.q, scfg.p, 2);
  const CostSpec costs = make_costs(cfg.cost, scfg.p, scfg.m, 50, 3);

  ControllerSpec spec;
  spec.kind = ControllerKind::OlcZk;
  spec.eta = 0.37;
  spec.h = 4;
  spec.estimator.N = 9;
  spec.estimator.sigma = 0.21;
  const ControllerSpec r = resolve_spec(spec, cfg, 50, sys, dist, costs);
  CHECK(r.eta == 0.37);
  CHECK(r.h == 4);
  CHECK(r.estimator.N == 9);
  CHECK(r.estimator.sigma == 0.21);
}

TEST_CASE("theory mode derives history, window, noise, and step size") {
  ExperimentConfig cfg = tiny_config();
  cfg.mode = ExperimentMode::Theory;
  cfg.gamma_T = 1;
  cfg.eta_scale = 1.0;
  const long long T = 1000;
  SystemConfig scfg = cfg.system;
  scfg.T = static_cast<int>(T);
  const SystemPath sys = generate_system(scfg, 11);
  const DisturbanceRealization dist =
      generate_disturbance(cfg.disturbance, scfg.T, scfg.q, scfg.p, 12);
  const CostSpec costs = make_costs(cfg.cost, scfg.p, scfg.m, T, 13);

  ControllerSpec spec;
  spec.kind = ControllerKind::OlcZk;
  spec.kappa_M = 0.8;
  const ControllerSpec r = resolve_spec(spec, cfg, T, sys, dist, costs);

  CHECK(r.h == theoretical_history(static_cast<int>(T), sys.gamma));
  const TheoreticalScalings sc = theoretical_scalings(1, T, r.h);
  CHECK(r.estimator.N == sc.N);
  CHECK(r.estimator.sigma == sc.sigma);

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
  CHECK(r.eta == theoretical_learning_rate(compute_oco_constants(in), r.h,
                                           static_cast<int>(T)));
  CHECK(r.eta > 0.0);

  // The calibration knob scales the rule linearly.
  cfg.eta_scale = 2.0;
  const ControllerSpec r2 = resolve_spec(spec, cfg, T, sys, dist, costs);
  CHECK(r2.eta == 2.0 * r.eta);
}

TEST_CASE("experiment runner aggregates runs per controller and horizon") {
  const ExperimentConfig cfg = tiny_config();
  const AggregateResult res = run_experiment(cfg);

  REQUIRE(res.series.size() == 2);
  const ControllerSeries& fk = res.series[0];
  const ControllerSeries& fm = res.series[1];
  CHECK(fk.name == "olc-fk");
  CHECK(fm.name == "fixed-m");
  CHECK(fk.T == 30);
  CHECK(fm.T == 30);

  for (const ControllerSeries* s : {&fk, &fm}) {
    CHECK(s->regret_mean.size() == 30);
    CHECK(s->regret_std.size() == 30);
    CHECK(s->cost_mean.size() == 30);
    CHECK(s->est_err_mean.size() == 30);
    CHECK(s->detections_mean.size() == 30);
    REQUIRE(s->final_regret_by_run.size() == 2);

    const double mean =
        0.5 * (s->final_regret_by_run[0] + s->final_regret_by_run[1]);
    CHECK(s->final_regret_mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(s->final_regret_mean ==
          doctest::Approx(s->regret_mean.back()).epsilon(1e-12));
    double var = 0.0;
    for (double v : s->final_regret_by_run) var += (v - mean) * (v - mean);
    var /= 2.0;
    CHECK(s->final_regret_std ==
          doctest::Approx(std::sqrt(var)).epsilon(1e-9));

    // Neither controller runs a change detector or an estimator.
    for (double d : s->detections_mean) CHECK(d == 0.0);
    CHECK(std::isnan(s->est_err_mean[0]));
    CHECK(std::isnan(s->est_err_mean[29]));
    for (double c : s->cost_mean) CHECK(c >= 0.0);
  }

  // The zero policy is inside the comparator class, so its realized episode
  // cannot beat the hindsight optimum by more than solver tolerance.
  for (double r : fm.final_regret_by_run) CHECK(r >= -1e-6);

  CHECK(res.slopes.empty());  // one horizon: nothing to fit
  CHECK(res.metadata_json.find("\"runs\": 2") != std::string::npos);
  CHECK(res.metadata_json.back() == '\n');
}

TEST_CASE("experiment runner is deterministic and run-prefix stable") {
  const ExperimentConfig cfg = tiny_config();
  const AggregateResult a = run_experiment(cfg);
  const AggregateResult b = run_experiment(cfg);
  REQUIRE(a.series.size() == b.series.size());
  for (size_t i = 0; i < a.series.size(); ++i) {
    CHECK(a.series[i].final_regret_mean == b.series[i].final_regret_mean);
    double diff = 0.0;
    for (long long t = 0; t < a.series[i].T; ++t)
      diff += std::abs(a.series[i].regret_mean[t] - b.series[i].regret_mean[t]);
    CHECK(diff == 0.0);
  }

  // Adding a run leaves run 0's episode untouched.
  ExperimentConfig one = cfg;
  one.runs = 1;
  const AggregateResult r1 = run_experiment(one);
  CHECK(r1.series[0].final_regret_by_run[0] ==
        a.series[0].final_regret_by_run[0]);
  CHECK(r1.series[1].final_regret_by_run[0] ==
        a.series[1].final_regret_by_run[0]);
}

TEST_CASE("multiple horizons produce a scaling fit per controller") {
  ExperimentConfig cfg = tiny_config();
  cfg.controllers = {cfg.controllers[1]};  // fixed zero policy only
  cfg.horizons = {24, 48};
  cfg.runs = 1;
  cfg.base_seed = 99;
  const AggregateResult res = run_experiment(cfg);

  REQUIRE(res.series.size() == 2);
  CHECK(res.series[0].T == 24);
  CHECK(res.series[1].T == 48);
  // The zero policy leaves all the disturbance cost on the table, so its mean
  // final regret is positive at both horizons and the fit exists.
  CHECK(res.series[0].final_regret_mean > 0.0);
  CHECK(res.series[1].final_regret_mean > 0.0);
  REQUIRE(res.slopes.count("fixed-m") == 1);
  CHECK(res.slopes.at("fixed-m").points == 2);
  CHECK(std::isfinite(res.slopes.at("fixed-m").slope));
}

TEST_CASE("CSV export is byte-deterministic with the documented headers") {
  ExperimentConfig cfg = tiny_config();
  cfg.controllers = {cfg.controllers[0]};  // olc-fk only
  cfg.horizons = {16};
  cfg.runs = 1;
  const AggregateResult res = run_experiment(cfg);

  const fs::path da = fresh_dir("tvdac_csv_a");
  const fs::path db = fresh_dir("tvdac_csv_b");
  export_csv(res, da.string());
  export_csv(res, db.string());

  for (const char* f : {"olc-fk_T16.csv", "summary.csv", "metadata.json"}) {
    const std::string ca = slurp(da / f);
    CHECK(ca == slurp(db / f));
    CHECK(!ca.empty());
  }

  std::istringstream series(slurp(da / "olc-fk_T16.csv"));
  std::string line;
  REQUIRE(std::getline(series, line));
  CHECK(line == "t,regret_mean,regret_std,cost_mean,est_err_mean,detections_mean");
  int rows = 0;
  while (std::getline(series, line)) ++rows;
  CHECK(rows == 16);

  std::istringstream summary(slurp(da / "summary.csv"));
  REQUIRE(std::getline(summary, line));
  CHECK(line == "controller,T,final_regret_mean,final_regret_std,scaling_slope");
  REQUIRE(std::getline(summary, line));
  CHECK(line.rfind("olc-fk,16,", 0) == 0);
  // One horizon: the slope column records the absence of a fit.
  CHECK(line.substr(line.size() - 4) == ",nan");
}

TEST_CASE("command line interface reports the documented exit codes") {
  const std::string doc = R"({
    "system": {"n": 2, "m": 2, "p": 2, "q": 2},
    "disturbance": {"kappa_w": 0.8},
    "controllers": [{"kind": "fixed-m"}],
    "horizons": [12],
    "runs": 1,
    "base_seed": 5
  })";
  const fs::path good = write_config("tvdac_cli_good.json", doc);
  const fs::path bad =
      write_config("tvdac_cli_bad.json", R"({"colour": "red"})");

  CHECK(run_cli({"validate", "--config", good.string()}) == 0);
  CHECK(run_cli({"validate", "--config", bad.string()}) == 1);
  CHECK(run_cli({"validate", "--config",
                 (fs::temp_directory_path() / "tvdac_no_such.json").string()}) ==
        1);
  CHECK(run_cli({"validate"}) == 2);                   // missing --config
  CHECK(run_cli({"frobnicate"}) == 2);                 // unknown subcommand
  CHECK(run_cli({"validate", "--config", good.string(), "--horizons",
                 "10,20"}) == 0);

  const fs::path out_sweep = fresh_dir("tvdac_cli_sweep");
  CHECK(run_cli({"sweep", "--config", good.string(), "--out",
                 out_sweep.string()}) == 1);  // one horizon is not a sweep
  const fs::path out_cmp = fresh_dir("tvdac_cli_cmp");
  CHECK(run_cli({"compare", "--config", good.string(), "--out",
                 out_cmp.string()}) == 1);  // one controller to compare

  const fs::path out_run = fresh_dir("tvdac_cli_run");
  CHECK(run_cli({"run", "--config", good.string(), "--out",
                 out_run.string()}) == 0);
  CHECK(fs::exists(out_run / "fixed-m_T12.csv"));
  CHECK(fs::exists(out_run / "summary.csv"));
  CHECK(fs::exists(out_run / "metadata.json"));
}
