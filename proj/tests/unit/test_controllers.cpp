#include <doctest.h>

#include <cmath>

#include "tvdac/controllers.hpp"
#include "tvdac/regret.hpp"

using namespace tvdac;

namespace {

MatrixXd scalar(double v) { return (MatrixXd(1, 1) << v).finished(); }

std::shared_ptr<const SystemPath> scalar_system(int T, double a, double b,
                                                double c, double gamma) {
  SystemPath sys;
  sys.T = T;
  sys.n = sys.m = sys.p = sys.q = 1;
  sys.gamma = gamma;
  sys.kappa_a = std::abs(c);
  sys.kappa_b = std::abs(b);
  sys.A.assign(T, scalar(a));
  sys.B.assign(T, scalar(b));
  sys.Bw.assign(T, scalar(1.0));
  sys.C.assign(T, scalar(c));
  return std::make_shared<const SystemPath>(std::move(sys));
}

std::shared_ptr<const DisturbanceRealization> constant_disturbance(
    int T, double w_val) {
  DisturbanceRealization d;
  d.T = T;
  d.q = d.p = 1;
  d.kappa_w = std::abs(w_val);
  d.kappa_e = 0.0;
  d.w.assign(T, scalar(w_val).col(0));
  d.e.assign(T, VectorXd::Zero(1));
  return std::make_shared<const DisturbanceRealization>(std::move(d));
}

std::shared_ptr<const CostSpec> unit_quadratic(int p, int m) {
  return std::make_shared<const CostSpec>(
      CostSpec::quadratic(MatrixXd::Identity(p, p), MatrixXd::Identity(m, m)));
}

}  // namespace

TEST_CASE("gradient controller reproduces a hand-simulated scalar episode") {
  // x' = 0.5 x + u + w, y = x, w = 0.6, costs y^2 + u^2, eta = 0.5, h = 1,
  // zero initial parameter.  Worked by hand:
  //   t=1..3: u = 0, y = (0, 0.6, 0.9), costs (0, 0.36, 0.81)
  //   updates: M2 = M3 = 0 (no disturbance depth yet), M4 = -0.54,
  //            M5 = -0.7812
  //   t=4: u = M4 w = -0.324, y = 1.05, cost = 1.05^2 + 0.324^2 = 1.207476
  const int T = 4;
  auto sys = scalar_system(T, 0.5, 1.0, 1.0, 0.5);
  auto dist = constant_disturbance(T, 0.6);
  auto costs = unit_quadratic(1, 1);

  ControllerSpec spec;
  spec.kind = ControllerKind::OlcFk;
  spec.eta = 0.5;
  spec.h = 1;
  spec.kappa_M = 1.0;
  auto policy = make_policy(spec, sys, dist, VectorXd::Zero(1), 7);
  const EpisodeTrace tr = rollout(sys, dist, costs, *policy, VectorXd::Zero(1));

  const double eys[4] = {0.0, 0.6, 0.9, 1.05};
  const double eus[4] = {0.0, 0.0, 0.0, -0.324};
  const double ecs[4] = {0.0, 0.36, 0.81, 1.207476};
  const double ems[4] = {0.0, 0.0, -0.54, -0.7812};  // parameter after step t
  for (int t = 1; t <= T; ++t) {
    CHECK(tr.y[t - 1](0) == doctest::Approx(eys[t - 1]).epsilon(1e-12));
    CHECK(tr.u[t - 1](0) == doctest::Approx(eus[t - 1]).epsilon(1e-12));
    CHECK(tr.cost[t - 1] == doctest::Approx(ecs[t - 1]).epsilon(1e-12));
    CHECK(tr.M[t - 1].blocks[0](0, 0) ==
          doctest::Approx(ems[t - 1]).epsilon(1e-12));
    CHECK(std::isnan(tr.est_err[t - 1]));  // no operator estimate exposed
    CHECK(tr.detection[t - 1] == 0);
  }
  CHECK(tr.total_cost() == doctest::Approx(2.377476).epsilon(1e-12));
}

TEST_CASE("noiseless frozen-operator loop equals the known-operator loop") {
  // With zero exploration, the true operator supplied, and enough memory to
  // make the truncation exact, the estimated-offset loop reproduces the
  // known-operator loop step for step on a constant system.
  SystemConfig scfg;
  scfg.n = scfg.m = scfg.p = scfg.q = 2;
  scfg.T = 8;
  scfg.gamma = 0.4;
  scfg.schedule = Schedule::Constant;
  scfg.channel = DisturbanceChannel::Random;
  auto sys = std::make_shared<const SystemPath>(generate_system(scfg, 90));
  DisturbanceConfig dcfg;
  dcfg.kappa_w = 0.8;
  dcfg.kappa_e = 0.2;
  auto dist = std::make_shared<const DisturbanceRealization>(
      generate_disturbance(dcfg, scfg.T, scfg.q, scfg.p, 91));
  auto costs = unit_quadratic(2, 2);
  const VectorXd x1 = VectorXd::Zero(2);
  const int h = scfg.T - 1;

  ControllerSpec fk;
  fk.kind = ControllerKind::OlcFk;
  fk.eta = 0.3;
  fk.h = h;
  fk.kappa_M = 1.0;
  auto p_fk = make_policy(fk, sys, dist, x1, 5);
  const EpisodeTrace tr_fk = rollout(sys, dist, costs, *p_fk, x1);

  ControllerSpec fg = fk;
  fg.kind = ControllerKind::FixedG;
  fg.estimator.sigma = 0.0;
  const MarkovOperator G_true = markov_operator(*sys, scfg.T, h);
  auto p_fg = make_policy(fg, sys, dist, x1, 6, &G_true);
  const EpisodeTrace tr_fg = rollout(sys, dist, costs, *p_fg, x1);

  for (int t = 1; t <= scfg.T; ++t) {
    CHECK((tr_fk.u[t - 1] - tr_fg.u[t - 1]).norm() < 1e-8);
    CHECK(tr_fk.cost[t - 1] == doctest::Approx(tr_fg.cost[t - 1]).epsilon(1e-8));
    CHECK(tr_fk.M[t - 1].distance(tr_fg.M[t - 1]) < 1e-8);
    CHECK(tr_fg.est_err[t - 1] == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("rollouts are deterministic in the seed") {
  SystemConfig scfg;
  scfg.T = 40;
  scfg.schedule = Schedule::PerStepRandom;
  auto sys = std::make_shared<const SystemPath>(generate_system(scfg, 70));
  DisturbanceConfig dcfg;
  dcfg.kappa_w = 0.5;
  auto dist = std::make_shared<const DisturbanceRealization>(
      generate_disturbance(dcfg, scfg.T, scfg.q, scfg.p, 71));
  auto costs = unit_quadratic(scfg.p, scfg.m);
  const VectorXd x1 = VectorXd::Zero(scfg.n);

  ControllerSpec spec;
  spec.kind = ControllerKind::OlcZk;
  spec.h = 2;
  spec.eta = 0.2;
  spec.estimator.N = 6;
  spec.estimator.sigma = 0.3;

  auto run = [&](std::uint64_t seed) {
    auto p = make_policy(spec, sys, dist, x1, seed);
    return rollout(sys, dist, costs, *p, x1);
  };
  const EpisodeTrace a = run(1001), b = run(1001), c = run(1002);
  double dab = 0.0, dac = 0.0;
  for (int t = 0; t < scfg.T; ++t) {
    dab += (a.u[t] - b.u[t]).norm();
    dac += (a.u[t] - c.u[t]).norm();
  }
  CHECK(dab == 0.0);  // bit-identical replay
  CHECK(dac > 0.0);   // the exploration stream actually depends on the seed
}

TEST_CASE("zero fixed parameter leaves the system on its natural path") {
  SystemConfig scfg;
  scfg.T = 25;
  scfg.schedule = Schedule::PerStepRandom;
  auto sys = std::make_shared<const SystemPath>(generate_system(scfg, 72));
  DisturbanceConfig dcfg;
  dcfg.kappa_w = 0.7;
  dcfg.kappa_e = 0.1;
  auto dist = std::make_shared<const DisturbanceRealization>(
      generate_disturbance(dcfg, scfg.T, scfg.q, scfg.p, 73));
  auto costs = unit_quadratic(scfg.p, scfg.m);
  const VectorXd x1 = VectorXd::Zero(scfg.n);

  ControllerSpec spec;
  spec.kind = ControllerKind::FixedM;
  spec.h = 3;
  auto policy = make_policy(spec, sys, dist, x1, 9);
  const EpisodeTrace tr = rollout(sys, dist, costs, *policy, x1);
  for (int t = 1; t <= scfg.T; ++t) {
    CHECK(tr.u[t - 1].norm() == 0.0);
    CHECK((tr.y[t - 1] - natural_output(*sys, *dist, t, x1)).norm() < 1e-10);
    CHECK(std::isnan(tr.est_err[t - 1]));
  }
}

TEST_CASE("random-initial fixed parameter is feasible and reproducible") {
  SystemConfig scfg;
  scfg.T = 10;
  auto sys = std::make_shared<const SystemPath>(generate_system(scfg, 74));
  DisturbanceConfig dcfg;
  auto dist = std::make_shared<const DisturbanceRealization>(
      generate_disturbance(dcfg, scfg.T, scfg.q, scfg.p, 75));
  auto costs = unit_quadratic(scfg.p, scfg.m);
  const VectorXd x1 = VectorXd::Zero(scfg.n);

  ControllerSpec spec;
  spec.kind = ControllerKind::FixedM;
  spec.h = 2;
  spec.kappa_M = 0.6;
  spec.random_init = true;
  auto run = [&](std::uint64_t seed) {
    auto p = make_policy(spec, sys, dist, x1, seed);
    return rollout(sys, dist, costs, *p, x1);
  };
  const EpisodeTrace a = run(21), b = run(21), c = run(22);
  CHECK(a.M[0].norm() > 0.0);
  CHECK(a.M[0].feasible(1e-12));
  CHECK(a.M[0].distance(b.M[0]) == 0.0);
  CHECK(a.M[0].distance(c.M[0]) > 0.0);
  // Frozen across the episode.
  CHECK(a.M[0].distance(a.M[9]) == 0.0);
  CHECK((a.u[3] - dac_control(a.M[0], {dist->w_at(3), dist->w_at(2)})).norm() <
        1e-12);
}

TEST_CASE("random parameter baseline redraws a feasible parameter per step") {
  SystemConfig scfg;
  scfg.T = 15;
  auto sys = std::make_shared<const SystemPath>(generate_system(scfg, 76));
  DisturbanceConfig dcfg;
  auto dist = std::make_shared<const DisturbanceRealization>(
      generate_disturbance(dcfg, scfg.T, scfg.q, scfg.p, 77));
  auto costs = unit_quadratic(scfg.p, scfg.m);
  const VectorXd x1 = VectorXd::Zero(scfg.n);

  ControllerSpec spec;
  spec.kind = ControllerKind::RandomM;
  spec.h = 2;
  spec.kappa_M = 0.4;
  auto policy = make_policy(spec, sys, dist, x1, 31);
  const EpisodeTrace tr = rollout(sys, dist, costs, *policy, x1);
  for (int t = 0; t < scfg.T; ++t) CHECK(tr.M[t].feasible(1e-12));
  CHECK(tr.M[0].distance(tr.M[1]) > 0.0);
  CHECK(tr.M[1].distance(tr.M[2]) > 0.0);
}

TEST_CASE("explore-then-commit switches phases and recovers the operator") {
  // A = 0 makes the length-one operator description exact, and zero
  // disturbances make the fit noiseless, so the post-exploration estimate
  // error collapses to the ridge bias.
  const int T = 14;
  auto sys = scalar_system(T, 0.0, 1.3, 0.9, 0.5);
  auto dist = constant_disturbance(T, 0.0);
  auto costs = unit_quadratic(1, 1);
  const VectorXd x1 = VectorXd::Zero(1);

  ControllerSpec spec;
  spec.kind = ControllerKind::OlcTi;
  spec.h = 1;
  spec.eta = 0.1;
  spec.kappa_M = 1.0;
  spec.explore_steps = 6;
  spec.estimator.sigma = 0.7;
  spec.estimator.lambda = 1e-6;
  auto policy = make_policy(spec, sys, dist, x1, 41);
  const EpisodeTrace tr = rollout(sys, dist, costs, *policy, x1);

  for (int t = 1; t <= 6; ++t) {
    CHECK(tr.du[t - 1].norm() > 0.0);
    CHECK((tr.u[t - 1] - tr.du[t - 1]).norm() == 0.0);  // pure exploration
    CHECK(std::isnan(tr.est_err[t - 1]));               // no estimate yet
  }
  for (int t = 7; t <= T; ++t) {
    CHECK(tr.du[t - 1].norm() == 0.0);
    CHECK(tr.u[t - 1].norm() == 0.0);  // w = 0, so the policy input is zero
    CHECK(tr.est_err[t - 1] < 1e-4);   // |G^ - CB| after the one-shot fit
  }
}

TEST_CASE("explore-then-commit defaults its exploration to T^(2/3)") {
  const int T = 27;  // 27^(2/3) = 9
  auto sys = scalar_system(T, 0.0, 1.0, 1.0, 0.5);
  auto dist = constant_disturbance(T, 0.0);
  auto costs = unit_quadratic(1, 1);
  ControllerSpec spec;
  spec.kind = ControllerKind::OlcTi;
  spec.h = 1;
  spec.eta = 0.1;
  spec.estimator.sigma = 0.5;
  auto policy = make_policy(spec, sys, dist, VectorXd::Zero(1), 43);
  const EpisodeTrace tr =
      rollout(sys, dist, costs, *policy, VectorXd::Zero(1));
  CHECK(tr.du[8].norm() > 0.0);    // t = 9: still exploring
  CHECK(tr.du[9].norm() == 0.0);   // t = 10: committed
}

TEST_CASE("periodic-estimate controller tracks a constant operator") {
  SystemConfig scfg;
  scfg.n = scfg.m = scfg.p = scfg.q = 2;
  scfg.T = 60;
  scfg.gamma = 0.5;
  scfg.schedule = Schedule::Constant;
  scfg.channel = DisturbanceChannel::Random;
  auto sys = std::make_shared<const SystemPath>(generate_system(scfg, 80));
  DisturbanceConfig dcfg;
  dcfg.kappa_w = 0.02;
  auto dist = std::make_shared<const DisturbanceRealization>(
      generate_disturbance(dcfg, scfg.T, scfg.q, scfg.p, 81));
  auto costs = unit_quadratic(2, 2);
  const VectorXd x1 = VectorXd::Zero(2);

  ControllerSpec spec;
  spec.kind = ControllerKind::OlcZk;
  spec.h = 2;
  spec.eta = 0.1;
  spec.kappa_M = 0.5;
  spec.estimator.N = 10;  // period length 14
  spec.estimator.sigma = 0.5;
  auto policy = make_policy(spec, sys, dist, x1, 82);
  const EpisodeTrace tr = rollout(sys, dist, costs, *policy, x1);

  CHECK(tr.est_err[12] == doctest::Approx(tr.est_err[0]).epsilon(1e-12));
  CHECK(tr.est_err[13] < 0.5 * tr.est_err[0]);  // first refresh at t = 14
  CHECK(tr.est_err[scfg.T - 1] < 0.5 * tr.est_err[0]);
}

TEST_CASE("change-point controller wires the detector into the trace") {
  SystemConfig scfg;
  scfg.n = scfg.m = scfg.p = scfg.q = 2;
  scfg.T = 30;
  scfg.schedule = Schedule::Piecewise;
  scfg.change_times = {16};
  auto sys = std::make_shared<const SystemPath>(generate_system(scfg, 83));
  DisturbanceConfig dcfg;
  dcfg.kappa_w = 0.1;
  auto dist = std::make_shared<const DisturbanceRealization>(
      generate_disturbance(dcfg, scfg.T, scfg.q, scfg.p, 84));
  auto costs = unit_quadratic(2, 2);
  const VectorXd x1 = VectorXd::Zero(2);

  ControllerSpec spec;
  spec.kind = ControllerKind::OlcZkCpd;
  spec.h = 2;
  spec.eta = 0.1;
  spec.estimator.N = 5;
  spec.estimator.sigma = 0.3;
  spec.estimator.beta_override = 100.0;  // threshold far above any change
  auto policy = make_policy(spec, sys, dist, x1, 85);
  const EpisodeTrace tr = rollout(sys, dist, costs, *policy, x1);
  REQUIRE(static_cast<int>(tr.detection.size()) == scfg.T);
  for (int t = 0; t < scfg.T; ++t) CHECK(tr.detection[t] == 0);
  CHECK(std::isfinite(tr.total_cost()));
}

TEST_CASE("controller names and capability flags") {
  CHECK(default_controller_name(ControllerKind::OlcFk) == "olc-fk");
  CHECK(default_controller_name(ControllerKind::OlcZk) == "olc-zk");
  CHECK(default_controller_name(ControllerKind::OlcZkCpd) == "olc-zk-cpd");
  CHECK(default_controller_name(ControllerKind::FixedM) == "fixed-m");
  CHECK(default_controller_name(ControllerKind::RandomM) == "random-m");
  CHECK(default_controller_name(ControllerKind::FixedG) == "fixed-g");
  CHECK(default_controller_name(ControllerKind::RandomG) == "random-g");
  CHECK(default_controller_name(ControllerKind::OlcTi) == "olc-ti");

  ControllerSpec s;
  s.kind = ControllerKind::FixedM;
  CHECK_FALSE(s.uses_estimator());
  CHECK_FALSE(s.is_learning());
  s.kind = ControllerKind::OlcZkCpd;
  CHECK(s.uses_estimator());
  CHECK(s.is_learning());
  s.kind = ControllerKind::OlcFk;
  CHECK_FALSE(s.uses_estimator());
  CHECK(s.is_learning());
  s.name = "";
  CHECK(s.resolved_name() == "olc-fk");
  s.name = "mine";
  CHECK(s.resolved_name() == "mine");
}

TEST_CASE("controller validation rejects bad specs") {
  ControllerSpec s;
  s.kind = ControllerKind::OlcFk;
  s.h = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = ControllerSpec{};
  s.eta = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = ControllerSpec{};
  s.kind = ControllerKind::FixedM;
  s.eta = 0.0;  // fine: no gradient updates
  CHECK_NOTHROW(s.validate());
  s = ControllerSpec{};
  s.kind = ControllerKind::OlcZkCpd;
  s.estimator.sigma = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = ControllerSpec{};
  s.kind = ControllerKind::OlcTi;
  s.explore_steps = -1;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("matched setting requires matching disturbance and input widths") {
  SystemConfig scfg;  // m = 2, q = 3
  scfg.T = 10;
  auto sys = std::make_shared<const SystemPath>(generate_system(scfg, 86));
  DisturbanceConfig dcfg;
  auto dist = std::make_shared<const DisturbanceRealization>(
      generate_disturbance(dcfg, scfg.T, scfg.q, scfg.p, 87));
  ControllerSpec spec;
  spec.kind = ControllerKind::OlcZk;
  spec.setting = Setting::Matched;
  CHECK_THROWS_AS(
      make_policy(spec, sys, dist, VectorXd::Zero(scfg.n), 88),
      ConfigError);
}
