#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mzsim/analysis.hpp"
#include "mzsim/errors.hpp"
#include "mzsim/experiment.hpp"
#include "mzsim/io.hpp"
#include "mzsim/phase.hpp"
#include "mzsim/rng.hpp"

namespace py = pybind11;
using namespace mzsim;

namespace {

std::vector<SinePoint> points_from(const std::vector<double>& deltas,
                                   const std::vector<double>& fractions) {
  if (deltas.size() != fractions.size()) throw UsageError("deltas and fractions differ in length");
  std::vector<SinePoint> pts;
  for (std::size_t i = 0; i < deltas.size(); ++i) pts.push_back({deltas[i], fractions[i]});
  return pts;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Deterministic-particle Mach-Zehnder interference simulator";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<SequencingError>(m, "SequencingError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  m.attr("TWO_PI") = kTwoPi;

  // ---- phase arithmetic
  m.def("wrap_phase", [](double theta) { return wrap_phase(theta).radians(); }, py::arg("theta"));
  m.def("signed_diff",
        [](double a, double b) { return signed_diff(wrap_phase(a), wrap_phase(b)).radians(); },
        py::arg("a"), py::arg("b"));
  m.def("phase_at",
        [](double frequency, double offset, double t) {
          return phase_at(PhaseOscillator(frequency, wrap_phase(offset)), t).radians();
        },
        py::arg("frequency"), py::arg("offset"), py::arg("t"));
  m.def("decide",
        [](double diff) { return std::string(to_string(decide(wrap_phase(diff)))); },
        py::arg("diff"));
  m.def("derive_child_seed", &derive_child_seed, py::arg("master_seed"), py::arg("index"));

  // ---- configuration
  py::class_<SplitterConfig>(m, "SplitterConfig")
      .def(py::init<>())
      .def_readwrite("frequency", &SplitterConfig::frequency)
      .def_property(
          "initial_offset", [](const SplitterConfig& s) { return s.initial_offset.radians(); },
          [](SplitterConfig& s, double v) { s.initial_offset = wrap_phase(v); })
      .def_readwrite("update_alpha", &SplitterConfig::update_alpha)
      .def_readwrite("update_beta", &SplitterConfig::update_beta);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("photon_count", &ExperimentConfig::photon_count)
      .def_readwrite("source_rate", &ExperimentConfig::source_rate)
      .def_property(
          "inter_arrival_law",
          [](const ExperimentConfig& c) { return std::string(to_string(c.inter_arrival_law)); },
          [](ExperimentConfig& c, const std::string& s) {
            if (s == "exponential") c.inter_arrival_law = InterArrivalLaw::Exponential;
            else if (s == "uniform") c.inter_arrival_law = InterArrivalLaw::Uniform;
            else if (s == "fixed") c.inter_arrival_law = InterArrivalLaw::Fixed;
            else throw ConfigError("inter_arrival_law", "unknown law '" + s + "'");
          })
      .def_readwrite("particle_frequency", &ExperimentConfig::particle_frequency)
      .def_property(
          "fixed_initial_phase",
          [](const ExperimentConfig& c) -> std::optional<double> {
            if (c.particle_initial_phase.kind == InitialPhase::Kind::Fixed) {
              return c.particle_initial_phase.value.radians();
            }
            return std::nullopt;
          },
          [](ExperimentConfig& c, std::optional<double> v) {
            c.particle_initial_phase = v ? InitialPhase::fixed(wrap_phase(*v)) : InitialPhase::uniform();
          },
          "None for uniformly random photon phases, else the phase at emission")
      .def_readwrite("bs1", &ExperimentConfig::bs1)
      .def_readwrite("bs2", &ExperimentConfig::bs2)
      .def_readwrite("base_path_length", &ExperimentConfig::base_path_length)
      .def_readwrite("delta", &ExperimentConfig::delta)
      .def_readwrite("master_seed", &ExperimentConfig::master_seed)
      .def_readwrite("carry_memory", &ExperimentConfig::carry_memory)
      .def("validate", &ExperimentConfig::validate)
      .def("period", &ExperimentConfig::period)
      .def("to_json", [](const ExperimentConfig& c) { return serialize_config(c); })
      .def(py::self == py::self);

  m.def("reference_config", &reference_config);
  m.def("tuned_visibility_config", &tuned_visibility_config);
  m.def("load_config", [](const std::filesystem::path& p) { return load_config(p); }, py::arg("path"));
  m.def("parse_config", [](const std::string& text) { return parse_config(text); }, py::arg("text"));

  // ---- runs
  py::class_<DetectorCounts>(m, "DetectorCounts")
      .def_readonly("d1", &DetectorCounts::d1)
      .def_readonly("d2", &DetectorCounts::d2)
      .def_property_readonly("d1_fraction", &DetectorCounts::d1_fraction);

  py::class_<RunRecord>(m, "RunRecord")
      .def_readonly("config", &RunRecord::config)
      .def_readonly("delta", &RunRecord::delta)
      .def_readonly("stream_seed", &RunRecord::stream_seed)
      .def_readonly("counts", &RunRecord::counts);

  py::class_<SweepPoint>(m, "SweepPoint")
      .def_readonly("delta", &SweepPoint::delta)
      .def_readonly("stream_seed", &SweepPoint::stream_seed)
      .def_readonly("counts", &SweepPoint::counts)
      .def_readonly("d1_fraction", &SweepPoint::d1_fraction);

  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("points", &SweepResult::points)
      .def_property_readonly("deltas",
                             [](const SweepResult& s) {
                               std::vector<double> d;
                               for (const auto& p : s.points) d.push_back(p.delta);
                               return d;
                             })
      .def_property_readonly("fractions", [](const SweepResult& s) {
        std::vector<double> f;
        for (const auto& p : s.points) f.push_back(p.d1_fraction);
        return f;
      });

  m.def("run_single_bs", [](const ExperimentConfig& c) { return run_single_bs(c); }, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("run_mzi", [](const ExperimentConfig& c) { return run_mzi(c); }, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("run_sweep",
        [](const ExperimentConfig& c, const std::vector<double>& deltas, unsigned parallel) {
          return run_sweep(c, deltas, {false, parallel});
        },
        py::arg("config"), py::arg("deltas"), py::arg("parallel") = 1,
        py::call_guard<py::gil_scoped_release>());
  m.def("default_deltas",
        [](const ExperimentConfig& c, std::size_t steps, std::optional<double> delta_max) {
          return default_deltas(c, steps, delta_max);
        },
        py::arg("config"), py::arg("steps") = 50, py::arg("delta_max") = py::none());

  // ---- analysis
  py::class_<IntervalEstimate>(m, "IntervalEstimate")
      .def_readonly("point", &IntervalEstimate::point)
      .def_readonly("lo", &IntervalEstimate::lo)
      .def_readonly("hi", &IntervalEstimate::hi)
      .def_readonly("confidence", &IntervalEstimate::confidence);

  py::class_<SineFit>(m, "SineFit")
      .def_readonly("amplitude", &SineFit::amplitude)
      .def_readonly("angular_frequency", &SineFit::angular_frequency)
      .def_property_readonly("phase", [](const SineFit& f) { return f.phase.radians(); })
      .def_readonly("offset", &SineFit::offset)
      .def_readonly("r_squared", &SineFit::r_squared)
      .def_readonly("converged", &SineFit::converged)
      .def("period", &SineFit::period)
      .def("__call__", &SineFit::operator());

  py::class_<QmComparison>(m, "QmComparison")
      .def_readonly("residuals", &QmComparison::residuals)
      .def_readonly("model_visibility", &QmComparison::model_visibility)
      .def_readonly("ideal_visibility", &QmComparison::ideal_visibility)
      .def_readonly("visibility_gap", &QmComparison::visibility_gap)
      .def_readonly("expected_period", &QmComparison::expected_period)
      .def_readonly("fit", &QmComparison::fit)
      .def_readonly("fitted_period", &QmComparison::fitted_period)
      .def_readonly("period_relative_error", &QmComparison::period_relative_error);

  m.def("binomial_ci", &binomial_ci, py::arg("successes"), py::arg("trials"),
        py::arg("confidence") = 0.95);
  m.def("visibility", [](const std::vector<double>& f) { return visibility(f); }, py::arg("fractions"));
  m.def("fit_sine",
        [](const std::vector<double>& deltas, const std::vector<double>& fractions) {
          return fit_sine(points_from(deltas, fractions));
        },
        py::arg("deltas"), py::arg("fractions"));
  m.def("qm_reference", &qm_reference, py::arg("delta"), py::arg("nu"));
  m.def("compare_to_qm", &compare_to_qm, py::arg("sweep"), py::arg("nu"));

  // ---- output
  m.def("sweep_to_csv", [](const SweepResult& s) { return to_csv(s); }, py::arg("sweep"));
  m.def("sweep_to_json",
        [](const std::string& command, const ExperimentConfig& c, const SweepResult& s) {
          return to_json(make_record(command, c, s));
        },
        py::arg("command"), py::arg("config"), py::arg("sweep"));
}
