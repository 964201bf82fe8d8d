#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "leafctl/calibration.hpp"
#include "leafctl/control.hpp"
#include "leafctl/error.hpp"
#include "leafctl/filter.hpp"
#include "leafctl/io.hpp"
#include "leafctl/json.hpp"
#include "leafctl/oracle.hpp"
#include "leafctl/session.hpp"
#include "leafctl/simulate.hpp"

namespace py = pybind11;
using namespace leafctl;

namespace {

// Larger structured results cross the boundary as JSON text and are decoded
// with the json module on the Python side.
py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Closed-loop infill-density control for sequentially printed leaf springs";

  py::register_exception<Error>(m, "LeafctlError");

  py::class_<ProcessModel>(m, "ProcessModel")
      .def(py::init<>())
      .def(py::init([](double alpha, double beta, double sigma_p, double sigma_o) {
             return ProcessModel{alpha, beta, sigma_p, sigma_o};
           }),
           py::arg("alpha"), py::arg("beta"), py::arg("sigma_p"), py::arg("sigma_o"))
      .def_readwrite("alpha", &ProcessModel::alpha)
      .def_readwrite("beta", &ProcessModel::beta)
      .def_readwrite("sigma_p", &ProcessModel::sigma_p)
      .def_readwrite("sigma_o", &ProcessModel::sigma_o)
      .def("leaf_mean", &ProcessModel::leaf_mean, py::arg("density"))
      .def("__eq__", [](const ProcessModel& a, const ProcessModel& b) { return a == b; })
      .def("__repr__", [](const ProcessModel& p) {
        return "ProcessModel(alpha=" + io::format_double(p.alpha) + ", beta=" + io::format_double(p.beta) +
               ", sigma_p=" + io::format_double(p.sigma_p) + ", sigma_o=" + io::format_double(p.sigma_o) + ")";
      });

  py::class_<BuildPlan>(m, "BuildPlan")
      .def(py::init([](int n, double target_k, int repetitions, double d_min, double d_max) {
             return BuildPlan{.n = n, .target_k = target_k, .repetitions = repetitions, .d_min = d_min,
                              .d_max = d_max};
           }),
           py::arg("n"), py::arg("target_k"), py::arg("repetitions") = 5, py::arg("d_min") = 0.0,
           py::arg("d_max") = 100.0)
      .def_readwrite("n", &BuildPlan::n)
      .def_readwrite("target_k", &BuildPlan::target_k)
      .def_readwrite("repetitions", &BuildPlan::repetitions)
      .def_readwrite("d_min", &BuildPlan::d_min)
      .def_readwrite("d_max", &BuildPlan::d_max)
      .def_readwrite("density_increment", &BuildPlan::density_increment);

  py::class_<BeliefState>(m, "BeliefState")
      .def(py::init([](int step, double mean, double variance) { return BeliefState{step, mean, variance}; }),
           py::arg("step") = 0, py::arg("mean") = 0.0, py::arg("variance") = 0.0)
      .def_readwrite("step", &BeliefState::step)
      .def_readwrite("mean", &BeliefState::mean)
      .def_readwrite("variance", &BeliefState::variance);

  py::class_<filter::Observation>(m, "Observation")
      .def(py::init([](double value, int repetitions) { return filter::Observation{value, repetitions}; }),
           py::arg("value"), py::arg("repetitions") = 1)
      .def_readwrite("value", &filter::Observation::value)
      .def_readwrite("repetitions", &filter::Observation::repetitions);

  py::class_<control::ControlDecision>(m, "ControlDecision")
      .def_readonly("recommended_density", &control::ControlDecision::recommended_density)
      .def_readonly("clamped", &control::ControlDecision::clamped)
      .def_readonly("unclamped_density", &control::ControlDecision::unclamped_density)
      .def_readonly("predicted_final_mean", &control::ControlDecision::predicted_final_mean)
      .def_readonly("predicted_final_sd", &control::ControlDecision::predicted_final_sd);

  py::enum_<StrategyKind>(m, "StrategyKind")
      .value("filtered", StrategyKind::filtered)
      .value("unfiltered", StrategyKind::unfiltered)
      .value("open_loop", StrategyKind::open_loop);

  m.def("validate", py::overload_cast<const BuildPlan&, const ProcessModel&>(&validate), py::arg("plan"),
        py::arg("model"));
  m.def("open_loop_density", &open_loop_density, py::arg("plan"), py::arg("model"));

  // filter
  m.def("effective_obs_variance", &filter::effective_obs_variance, py::arg("model"), py::arg("repetitions"));
  m.def("update", &filter::update, py::arg("belief"), py::arg("model"), py::arg("applied_density"),
        py::arg("observation"));
  m.def("variance_sequence", &filter::variance_sequence, py::arg("model"), py::arg("repetitions"),
        py::arg("steps"));
  m.def("steady_state_variance", &filter::steady_state_variance, py::arg("model"), py::arg("repetitions"));
  m.def(
      "posterior_oracle",
      [](const ProcessModel& model, const std::vector<double>& densities,
         const std::vector<filter::Observation>& observations, int points) {
        const auto grid = filter::default_oracle_grid(model, densities, observations, points);
        const auto r = filter::posterior_oracle(model, densities, observations, grid);
        return py::make_tuple(r.mean, r.variance);
      },
      py::arg("model"), py::arg("densities"), py::arg("observations"), py::arg("points") = 4001);

  // control
  m.def("allocate_equal_split", &control::allocate_equal_split, py::arg("target_k"), py::arg("current_mean"),
        py::arg("remaining"));
  m.def("optimal_density",
        py::overload_cast<const BuildPlan&, const ProcessModel&, double, int>(&control::optimal_density),
        py::arg("plan"), py::arg("model"), py::arg("belief_mean"), py::arg("step"));
  m.def(
      "predict_final",
      [](const BuildPlan& plan, const ProcessModel& model, const BeliefState& belief,
         const std::vector<double>& densities) {
        const auto p = control::predict_final(plan, model, belief, densities);
        return py::make_tuple(p.mean, p.sd);
      },
      py::arg("plan"), py::arg("model"), py::arg("belief"), py::arg("future_densities"));

  // calibration
  m.def(
      "stiffness_from_bending",
      [](const std::vector<std::pair<double, double>>& points) {
        std::vector<calibration::BendingPoint> pts;
        for (const auto& [d, l] : points) pts.push_back({d, l});
        return calibration::stiffness_from_bending(pts);
      },
      py::arg("points"));
  m.def(
      "calibrate_csv",
      [](const std::filesystem::path& path) { return calibration::calibrate(io::load_calibration_csv(path)); },
      py::arg("path"));

  // simulation
  m.def(
      "replay",
      [](const BuildPlan& plan, const ProcessModel& model, StrategyKind kind,
         const std::vector<filter::Observation>& observations) {
        return to_python(simulate::replay_strategy(plan, model, kind, observations));
      },
      py::arg("plan"), py::arg("model"), py::arg("kind"), py::arg("observations"));
  m.def(
      "monte_carlo",
      [](const BuildPlan& plan, const ProcessModel& model, int trials, std::uint64_t seed, bool paired,
         int threads) {
        simulate::SimConfig config{.plan = plan,
                                   .model_true = model,
                                   .trials = trials,
                                   .seed = seed,
                                   .paired = paired,
                                   .threads = threads};
        nlohmann::json j;
        {
          py::gil_scoped_release release;
          j = simulate::to_json(simulate::monte_carlo(config));
        }
        return to_python(j);
      },
      py::arg("plan"), py::arg("model"), py::arg("trials"), py::arg("seed") = 1, py::arg("paired") = false,
      py::arg("threads") = 0);

  // sessions
  py::class_<session::SessionStore>(m, "SessionStore")
      .def(py::init<std::filesystem::path>(), py::arg("data_dir"))
      .def(
          "create",
          [](session::SessionStore& s, const BuildPlan& plan, const ProcessModel& model,
             std::optional<std::string> id) { return to_python(session::to_json(s.create(plan, model, id))); },
          py::arg("plan"), py::arg("model"), py::arg("id") = py::none())
      .def(
          "record_measurement",
          [](session::SessionStore& s, const std::string& id, const std::vector<double>& values,
             std::optional<int> repetitions) {
            session::MeasurementInput input{.values = values, .repetitions = repetitions};
            return to_python(session::to_json(s.record_measurement(id, input)));
          },
          py::arg("id"), py::arg("values"), py::arg("repetitions") = py::none())
      .def(
          "override_density",
          [](session::SessionStore& s, const std::string& id, double density) {
            return to_python(session::to_json(s.override_density(id, density)));
          },
          py::arg("id"), py::arg("density"))
      .def(
          "get", [](const session::SessionStore& s, const std::string& id) { return to_python(session::to_json(s.get(id))); },
          py::arg("id"))
      .def("ids",
           [](const session::SessionStore& s) {
             std::vector<std::string> ids;
             for (const auto& summary : s.list()) ids.push_back(summary.id);
             return ids;
           })
      .def("remove", &session::SessionStore::remove, py::arg("id"));
}
