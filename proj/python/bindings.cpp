#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "oam/channel.hpp"
#include "oam/config_io.hpp"
#include "oam/estimation.hpp"
#include "oam/experiments.hpp"
#include "oam/link.hpp"
#include "oam/parallel.hpp"
#include "oam/precoding.hpp"
#include "oam/transform.hpp"

namespace py = pybind11;
using namespace oam;

namespace {

py::dict table_dict(const CsvTable& t) {
  py::dict d;
  d["comments"] = t.comments;
  d["header"] = t.header;
  d["rows"] = t.rows;
  return d;
}

std::vector<CMat> channel_matrices(const SystemConfig& c, const std::string& mode) {
  const auto m = mode == "exact" ? ChannelMode::exact : ChannelMode::farfield;
  const auto truth = c.placements();
  const auto h = c.ring_count() > 1 ? assemble_ucca_channel(c, truth, m, c.carriers.wave_numbers)
                                    : assemble_channel(c, truth, m, c.carriers.wave_numbers);
  return h.per_carrier;
}

}  // namespace

PYBIND11_MODULE(_oambackhaul, m) {
  m.doc() = "Multi-user OAM backhaul simulator";
  m.attr("__version__") = OAM_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<IllConditionedError>(m, "IllConditionedError", PyExc_ArithmeticError);

  py::class_<SbsPlacement>(m, "Placement")
      .def(py::init<>())
      .def(py::init([](double r, double el, double az) { return SbsPlacement{r, el, az}; }),
           py::arg("range"), py::arg("elevation"), py::arg("azimuth"))
      .def_readwrite("range", &SbsPlacement::range)
      .def_readwrite("elevation", &SbsPlacement::elevation)
      .def_readwrite("azimuth", &SbsPlacement::azimuth)
      .def("__repr__", [](const SbsPlacement& p) {
        return "Placement(range=" + std::to_string(p.range) + ", elevation=" + std::to_string(p.elevation) +
               ", azimuth=" + std::to_string(p.azimuth) + ")";
      });

  py::class_<SystemConfig>(m, "SystemConfig")
      .def_static("from_json", &parse_config, py::arg("text"))
      .def("to_json", &serialize_config)
      .def("validate", [](const SystemConfig& c) { return validate_config(c); })
      .def_property_readonly("users", &SystemConfig::user_count)
      .def_property_readonly("tx_elements", &SystemConfig::tx_elements)
      .def_property_readonly("rx_elements", &SystemConfig::rx_elements)
      .def_property_readonly("rings", &SystemConfig::ring_count)
      .def_property_readonly("data_modes", [](const SystemConfig& c) { return c.modes.data_modes; })
      .def_property_readonly("training_modes", [](const SystemConfig& c) { return c.modes.training_modes; })
      .def_property_readonly("wave_numbers", [](const SystemConfig& c) { return c.carriers.wave_numbers; })
      .def_property("placements", &SystemConfig::placements,
                    [](SystemConfig& c, const std::vector<SbsPlacement>& p) {
                      if (p.size() != c.users.size()) throw py::value_error("one placement per user");
                      for (std::size_t i = 0; i < p.size(); ++i) c.users[i].placement = p[i];
                    })
      .def("hash", &config_hash);

  py::class_<ExperimentSpec>(m, "Experiment")
      .def_static("from_json", &parse_experiment, py::arg("text"))
      .def_static("load", &load_experiment, py::arg("path"))
      .def_static("preset", &preset, py::arg("name"))
      .def("to_json", &serialize_experiment)
      .def_readwrite("name", &ExperimentSpec::name)
      .def_readwrite("scenario", &ExperimentSpec::scenario)
      .def_readwrite("trials", &ExperimentSpec::trials)
      .def_readwrite("seed", &ExperimentSpec::seed)
      .def_readwrite("exact_channel", &ExperimentSpec::exact_channel)
      .def_property_readonly("pipeline", [](const ExperimentSpec& s) { return to_string(s.pipeline); })
      .def_property(
          "snr_db", [](const ExperimentSpec& s) { return s.sweep.snr_db; },
          [](ExperimentSpec& s, const std::vector<double>& v) { s.sweep.snr_db = v; });

  m.def("list_presets", [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& p : list_presets()) out.emplace_back(p.name, p.description);
    return out;
  });

  m.def(
      "run_pipeline",
      [](const ExperimentSpec& spec, std::function<void(const std::string&)> progress) {
        RunOptions o;
        CsvTable t;
        {
          py::gil_scoped_release release;
          if (progress) {
            o.progress = [&](const std::string& s) {
              py::gil_scoped_acquire acquire;
              progress(s);
            };
          }
          t = run_pipeline(spec, o);
        }
        return table_dict(t);
      },
      py::arg("spec"), py::arg("progress") = nullptr,
      "Run the experiment's pipeline; returns {'comments', 'header', 'rows'}.");

  m.def("run_experiment", [](const ExperimentSpec& spec, const std::string& out_dir) {
    py::gil_scoped_release release;
    return run_experiment(spec, out_dir).path;
  });

  m.def(
      "estimate_positions",
      [](const SystemConfig& c, double snr_db, std::uint64_t seed) {
        py::gil_scoped_release release;
        return estimate_placements(c, snr_db, seed);
      },
      py::arg("config"), py::arg("snr_db"), py::arg("seed") = 1,
      "Simulated uplink training at snr_db followed by position estimation.");

  m.def("channel", &channel_matrices, py::arg("config"), py::arg("mode") = "farfield",
        "Per-carrier channel matrices for the config's placements.");

  m.def(
      "decoupling_residual",
      [](const SystemConfig& c, const std::vector<SbsPlacement>& design) {
        const auto chain = make_downlink_chain(c, ChannelMode::farfield);
        return verify_decoupling(chain.h_oam, design_precoder(c, design)).max_relative_total();
      },
      py::arg("config"), py::arg("design"),
      "max over carriers of ||H P - I|| / ||I|| for a precoder designed at `design`.");

  m.def(
      "spectral_efficiency",
      [](const SystemConfig& c, double snr_db, const std::vector<SbsPlacement>& design) {
        const auto chain = make_downlink_chain(c, ChannelMode::farfield);
        return evaluate_se(c, chain, design_precoder(c, design.empty() ? c.placements() : design), snr_db).se;
      },
      py::arg("config"), py::arg("snr_db"), py::arg("design") = std::vector<SbsPlacement>{});

  m.def("bessel_j", &bessel_j, py::arg("n"), py::arg("x"));
  m.def("training_overhead_factor", &training_overhead_factor);
  m.def(
      "circuit_power",
      [](const SystemConfig& c) { return circuit_power(c.power, c.user_count(), c.rx_elements(), c.ring_count()); },
      py::arg("config"));
  m.def("set_max_threads", &set_max_threads, py::arg("n"));
}
