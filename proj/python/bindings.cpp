#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "tvdac/harness.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace tvdac;

PYBIND11_MODULE(_tvdac, m) {
  m.doc() = "online control of unknown time-varying linear systems";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);

  py::enum_<Schedule>(m, "Schedule")
      .value("Constant", Schedule::Constant)
      .value("Piecewise", Schedule::Piecewise)
      .value("PerStepRandom", Schedule::PerStepRandom);

  py::enum_<DisturbanceChannel>(m, "DisturbanceChannel")
      .value("Identity", DisturbanceChannel::Identity)
      .value("MatchB", DisturbanceChannel::MatchB)
      .value("Random", DisturbanceChannel::Random);

  py::enum_<DisturbanceConfig::Kind>(m, "DisturbanceKind")
      .value("UniformBall", DisturbanceConfig::Kind::UniformBall)
      .value("Sinusoid", DisturbanceConfig::Kind::Sinusoid)
      .value("Constant", DisturbanceConfig::Kind::Constant);

  py::class_<SystemConfig>(m, "SystemConfig")
      .def(py::init<>())
      .def_readwrite("n", &SystemConfig::n)
      .def_readwrite("m", &SystemConfig::m)
      .def_readwrite("p", &SystemConfig::p)
      .def_readwrite("q", &SystemConfig::q)
      .def_readwrite("T", &SystemConfig::T)
      .def_readwrite("gamma", &SystemConfig::gamma)
      .def_readwrite("kappa_b", &SystemConfig::kappa_b)
      .def_readwrite("schedule", &SystemConfig::schedule)
      .def_readwrite("change_times", &SystemConfig::change_times)
      .def_readwrite("constant_C", &SystemConfig::constant_C)
      .def_readwrite("channel", &SystemConfig::channel)
      .def("validate", &SystemConfig::validate);

  py::class_<SystemPath>(m, "SystemPath")
      .def_readonly("T", &SystemPath::T)
      .def_readonly("n", &SystemPath::n)
      .def_readonly("m", &SystemPath::m)
      .def_readonly("p", &SystemPath::p)
      .def_readonly("q", &SystemPath::q)
      .def_readonly("gamma", &SystemPath::gamma)
      .def_readonly("kappa_a", &SystemPath::kappa_a)
      .def_readonly("kappa_b", &SystemPath::kappa_b)
      .def_readonly("change_times", &SystemPath::change_times)
      .def("A_at", &SystemPath::A_at, "t"_a,
           py::return_value_policy::copy)
      .def("B_at", &SystemPath::B_at, "t"_a,
           py::return_value_policy::copy)
      .def("Bw_at", &SystemPath::Bw_at, "t"_a,
           py::return_value_policy::copy)
      .def("C_at", &SystemPath::C_at, "t"_a,
           py::return_value_policy::copy);

  py::class_<DisturbanceConfig>(m, "DisturbanceConfig")
      .def(py::init<>())
      .def_readwrite("kind", &DisturbanceConfig::kind)
      .def_readwrite("kappa_w", &DisturbanceConfig::kappa_w)
      .def_readwrite("kappa_e", &DisturbanceConfig::kappa_e)
      .def_readwrite("period", &DisturbanceConfig::period)
      .def("validate", &DisturbanceConfig::validate);

  py::class_<DisturbanceRealization>(m, "DisturbanceRealization")
      .def_readonly("T", &DisturbanceRealization::T)
      .def_readonly("q", &DisturbanceRealization::q)
      .def_readonly("p", &DisturbanceRealization::p)
      .def_readonly("kappa_w", &DisturbanceRealization::kappa_w)
      .def_readonly("kappa_e", &DisturbanceRealization::kappa_e)
      .def("w_at", &DisturbanceRealization::w_at, "t"_a)
      .def("e_at", &DisturbanceRealization::e_at, "t"_a);

  py::class_<MarkovOperator>(m, "MarkovOperator")
      .def_static("zero", &MarkovOperator::zero, "h"_a, "p"_a, "m"_a)
      .def_readwrite("blocks", &MarkovOperator::blocks)
      .def("set_block",
           [](MarkovOperator& G, int k, const MatrixXd& B) {
             require(k >= 1 && k <= G.h(), "set_block: index out of range");
             G.blocks[k - 1] = B;
           },
           "k"_a, "block"_a)
      .def("h", &MarkovOperator::h)
      .def("p", &MarkovOperator::p)
      .def("m", &MarkovOperator::m)
      .def("stacked", &MarkovOperator::stacked)
      .def("spectral_norm", &MarkovOperator::spectral_norm)
      .def("frobenius_distance", &MarkovOperator::frobenius_distance,
           "other"_a);

  py::class_<DacParams>(m, "DacParams")
      .def_static("zero", &DacParams::zero, "h"_a, "m"_a, "q"_a, "kappa_M"_a)
      .def_readwrite("blocks", &DacParams::blocks)
      .def_readwrite("kappa_M", &DacParams::kappa_M)
      .def("set_block",
           [](DacParams& M, int k, const MatrixXd& B) {
             require(k >= 1 && k <= M.h(), "set_block: index out of range");
             M.blocks[k - 1] = B;
           },
           "k"_a, "block"_a)
      .def("h", &DacParams::h)
      .def("m", &DacParams::m)
      .def("q", &DacParams::q)
      .def("norm", &DacParams::norm)
      .def("distance", &DacParams::distance, "other"_a)
      .def("feasible", &DacParams::feasible, "tol"_a = 0.0);

  py::class_<GBounds>(m, "GBounds")
      .def(py::init<>())
      .def_readwrite("kappa_a", &GBounds::kappa_a)
      .def_readwrite("kappa_b", &GBounds::kappa_b)
      .def_readwrite("gamma", &GBounds::gamma)
      .def("block_bound", &GBounds::block_bound, "k"_a);

  py::class_<CostSpec>(m, "CostSpec")
      .def_static("quadratic", &CostSpec::quadratic, "Q"_a, "R"_a)
      .def_static("linear", &CostSpec::linear, "alpha"_a)
      .def_readonly("Q", &CostSpec::Q)
      .def_readonly("R", &CostSpec::R)
      .def_readonly("lip", &CostSpec::lip)
      .def_readonly("grad_bound", &CostSpec::grad_bound)
      .def("value", &CostSpec::value, "t"_a, "y"_a, "u"_a);

  py::class_<BetaInput>(m, "BetaInput")
      .def(py::init<>())
      .def_readwrite("n", &BetaInput::n)
      .def_readwrite("m", &BetaInput::m)
      .def_readwrite("h", &BetaInput::h)
      .def_readwrite("N", &BetaInput::N)
      .def_readwrite("delta", &BetaInput::delta)
      .def_readwrite("lambda_", &BetaInput::lambda)
      .def_readwrite("sigma", &BetaInput::sigma)
      .def_readwrite("kappa_a", &BetaInput::kappa_a)
      .def_readwrite("kappa_b", &BetaInput::kappa_b)
      .def_readwrite("kappa_M", &BetaInput::kappa_M)
      .def_readwrite("kappa_w", &BetaInput::kappa_w)
      .def_readwrite("kappa_e", &BetaInput::kappa_e)
      .def_readwrite("gamma", &BetaInput::gamma);

  py::class_<ComparatorOptions>(m, "ComparatorOptions")
      .def(py::init<>())
      .def_readwrite("tol", &ComparatorOptions::tol)
      .def_readwrite("max_iters", &ComparatorOptions::max_iters)
      .def_readwrite("num_starts", &ComparatorOptions::num_starts)
      .def_readwrite("seed", &ComparatorOptions::seed);

  py::class_<ComparatorResult>(m, "ComparatorResult")
      .def_readonly("M_star", &ComparatorResult::M_star)
      .def_readonly("costs", &ComparatorResult::costs)
      .def_readonly("objective", &ComparatorResult::objective)
      .def_readonly("pg_norm", &ComparatorResult::pg_norm)
      .def_readonly("iterations", &ComparatorResult::iterations)
      .def_readonly("converged", &ComparatorResult::converged);

  py::class_<RegretSeries>(m, "RegretSeries")
      .def_readonly("cumulative", &RegretSeries::cumulative)
      .def_readonly("final_regret", &RegretSeries::final_regret);

  py::class_<SlopeFit>(m, "SlopeFit")
      .def_readonly("slope", &SlopeFit::slope)
      .def_readonly("intercept", &SlopeFit::intercept)
      .def_readonly("stderr_slope", &SlopeFit::stderr_slope)
      .def_readonly("points", &SlopeFit::points);

  py::class_<ControllerSeries>(m, "ControllerSeries")
      .def_readonly("name", &ControllerSeries::name)
      .def_readonly("T", &ControllerSeries::T)
      .def_readonly("regret_mean", &ControllerSeries::regret_mean)
      .def_readonly("regret_std", &ControllerSeries::regret_std)
      .def_readonly("cost_mean", &ControllerSeries::cost_mean)
      .def_readonly("est_err_mean", &ControllerSeries::est_err_mean)
      .def_readonly("detections_mean", &ControllerSeries::detections_mean)
      .def_readonly("final_regret_by_run",
                    &ControllerSeries::final_regret_by_run)
      .def_readonly("final_regret_mean", &ControllerSeries::final_regret_mean)
      .def_readonly("final_regret_std", &ControllerSeries::final_regret_std);

  py::class_<AggregateResult>(m, "AggregateResult")
      .def_readonly("series", &AggregateResult::series)
      .def_readonly("slopes", &AggregateResult::slopes)
      .def_readonly("metadata_json", &AggregateResult::metadata_json);

  m.def("generate_system", &generate_system, "config"_a, "seed"_a);
  m.def("generate_disturbance", &generate_disturbance, "config"_a, "T"_a,
        "q"_a, "p"_a, "seed"_a);
  m.def("markov_operator", &markov_operator, "sys"_a, "t"_a, "h"_a);
  m.def("natural_outputs", &natural_outputs, "sys"_a, "dist"_a, "x1"_a);
  m.def("dac_control", &dac_control, "M"_a, "w_hist"_a);
  m.def("project_dac", &project_dac, "M"_a);
  m.def("ls_estimate", &ls_estimate, "U"_a, "Y"_a, "h"_a, "m"_a, "lambda_"_a);
  m.def("project_G", &project_G, "G"_a, "bounds"_a);
  m.def("compute_beta", &compute_beta, "input"_a);
  m.def("theoretical_history", &theoretical_history, "T"_a, "gamma"_a);
  m.def(
      "theoretical_scalings",
      [](int num_changes, long long T, int h_floor) {
        const TheoreticalScalings sc =
            theoretical_scalings(num_changes, T, h_floor);
        return py::make_tuple(sc.N, sc.sigma);
      },
      "num_changes"_a, "T"_a, "h_floor"_a = 0);
  m.def("counterfactual_rollout", &counterfactual_rollout, "M"_a, "sys"_a,
        "dist"_a, "costs"_a, "x1"_a);
  m.def("comparator_objective",
        [](const DacParams& M, const SystemPath& sys,
           const DisturbanceRealization& dist, const CostSpec& costs,
           const VectorXd& x1) {
          return comparator_objective(M, sys, dist, costs, x1);
        },
        "M"_a, "sys"_a, "dist"_a, "costs"_a, "x1"_a);
  m.def("comparator_gradient",
        [](const DacParams& M, const SystemPath& sys,
           const DisturbanceRealization& dist, const CostSpec& costs,
           const VectorXd& x1) {
          DacGradient g;
          const double v = comparator_objective(M, sys, dist, costs, x1, &g);
          return py::make_tuple(v, g);
        },
        "M"_a, "sys"_a, "dist"_a, "costs"_a, "x1"_a);
  m.def(
      "best_dac_in_hindsight",
      [](const SystemPath& sys, const DisturbanceRealization& dist,
         const CostSpec& costs, int h, double kappa_M,
         const ComparatorOptions& opts, std::optional<VectorXd> x1) {
        return best_dac_in_hindsight(sys, dist, costs, h, kappa_M, opts,
                                     x1 ? &*x1 : nullptr);
      },
      "sys"_a, "dist"_a, "costs"_a, "h"_a, "kappa_M"_a,
      "opts"_a = ComparatorOptions{}, "x1"_a = std::nullopt);
  m.def("regret_series", &regret_series, "realized_costs"_a,
        "comparator_costs"_a);
  m.def("fit_scaling_exponent", &fit_scaling_exponent, "points"_a);

  m.def(
      "run_experiment_json",
      [](const std::string& config_text) {
        return run_experiment(parse_config(config_text));
      },
      "config_text"_a, "Parse a JSON experiment config and run it.");
  m.def(
      "validate_config_json",
      [](const std::string& config_text) { parse_config(config_text); },
      "config_text"_a);
  m.def(
      "run_and_export_json",
      [](const std::string& config_text, const std::string& out_dir) {
        const AggregateResult res = run_experiment(parse_config(config_text));
        export_csv(res, out_dir);
        return res;
      },
      "config_text"_a, "out_dir"_a);
}
