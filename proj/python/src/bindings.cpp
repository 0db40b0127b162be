// Python bindings for the superlattice engine.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "superlattice/analysis.hpp"
#include "superlattice/errors.hpp"
#include "superlattice/interference.hpp"
#include "superlattice/perturb.hpp"
#include "superlattice/phasematch.hpp"
#include "superlattice/regression.hpp"
#include "superlattice/runner.hpp"
#include "superlattice/scenario.hpp"

namespace py = pybind11;
using namespace superlattice;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  return {a.data(), a.data() + a.size()};
}

UniaxialMedium medium_named(const std::string& name) {
  auto m = builtin_medium(name);
  if (!m) throw ValidationError("unknown medium '" + name + "'", "medium");
  return *m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Interference patterns of nonlinear crystal superlattices";
  m.attr("__version__") = SUPERLATTICE_VERSION;

  auto validation = py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NoPhaseMatchingError>(m, "NoPhaseMatchingError", PyExc_RuntimeError);
  py::register_exception<MetricsUnavailableError>(m, "MetricsUnavailableError", PyExc_RuntimeError);
  py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);
  py::register_exception<ScenarioParseError>(m, "ScenarioParseError", validation.ptr());

  py::class_<UniaxialMedium>(m, "UniaxialMedium")
      .def_readonly("label", &UniaxialMedium::label)
      .def_readwrite("temperature", &UniaxialMedium::temperature)
      .def("ordinary_index", [](const UniaxialMedium& self, double w) { return ordinary_index(self, w); })
      .def("extraordinary_index", [](const UniaxialMedium& self, double w) { return extraordinary_index(self, w); })
      .def("__repr__", [](const UniaxialMedium& self) { return "<UniaxialMedium " + self.label + ">"; });
  m.def("medium", &medium_named, py::arg("name") = "lithium_niobate_congruent", "Built-in crystal medium by name.");
  m.def("medium_names", &builtin_medium_names);

  py::class_<GasModel>(m, "GasModel")
      .def(py::init<>())
      .def_readwrite("background_index", &GasModel::background_index)
      .def_readwrite("resonance_wavelength", &GasModel::resonance_wavelength)
      .def_readwrite("linewidth", &GasModel::linewidth)
      .def_readwrite("peak_absorption", &GasModel::peak_absorption)
      .def_readwrite("reference_concentration", &GasModel::reference_concentration)
      .def_readwrite("concentration", &GasModel::concentration)
      .def("index", [](const GasModel& self, double w) { return gas_complex_index(self, w); });
  m.def("co2_like_gas", &co2_like_gas, py::arg("concentration"), py::arg("peak_absorption"));
  m.def("calibrate_gas_phase", &calibrate_gas_phase, py::arg("base"), py::arg("target_phase"),
        py::arg("idler_wavelength"), py::arg("gap_length"));

  py::class_<GapMedium>(m, "GapMedium")
      .def(py::init<>())
      .def_static("constant", &GapMedium::constant, py::arg("index"), py::arg("label") = "air")
      .def_static("gas", &GapMedium::gas, py::arg("model"), py::arg("label") = "gas")
      .def_property_readonly("label", &GapMedium::label)
      .def("index", &GapMedium::index);

  py::class_<PumpSpec>(m, "PumpSpec")
      .def(py::init([](double wavelength, double beam_diameter, double cut_angle) {
             return PumpSpec{wavelength, beam_diameter, cut_angle};
           }),
           py::arg("wavelength") = 532e-9, py::arg("beam_diameter") = 3e-3, py::arg("cut_angle") = 0.0)
      .def_readwrite("wavelength", &PumpSpec::wavelength)
      .def_readwrite("beam_diameter", &PumpSpec::beam_diameter)
      .def_readwrite("cut_angle", &PumpSpec::cut_angle);

  py::class_<CrystalElement>(m, "CrystalElement")
      .def(py::init<>())
      .def_readwrite("length", &CrystalElement::length)
      .def_readwrite("cut_angle_offset", &CrystalElement::cut_angle_offset)
      .def_readwrite("enabled", &CrystalElement::enabled);
  py::class_<GapElement>(m, "GapElement")
      .def(py::init<>())
      .def_readwrite("length", &GapElement::length)
      .def_readwrite("medium", &GapElement::medium);

  py::class_<SuperlatticeConfig>(m, "SuperlatticeConfig")
      .def_readwrite("pump", &SuperlatticeConfig::pump)
      .def_readwrite("crystal_medium", &SuperlatticeConfig::crystal_medium)
      .def_readwrite("crystals", &SuperlatticeConfig::crystals)
      .def_readwrite("gaps", &SuperlatticeConfig::gaps)
      .def_property_readonly("enabled_count", &SuperlatticeConfig::enabled_count)
      .def("validate", [](const SuperlatticeConfig& self) { validate(self); });
  m.def(
      "uniform_lattice",
      [](const PumpSpec& pump, std::size_t n, double crystal_length, double gap_length, const GapMedium& gap,
         const std::optional<UniaxialMedium>& medium) {
        return uniform_lattice(pump, n, crystal_length, gap_length, gap,
                               medium.value_or(congruent_lithium_niobate()));
      },
      py::arg("pump"), py::arg("crystals"), py::arg("crystal_length"), py::arg("gap_length"),
      py::arg("gap_medium") = GapMedium{}, py::arg("medium") = py::none());

  m.def(
      "collinear_signal_wavelength",
      [](const PumpSpec& pump, const std::optional<UniaxialMedium>& medium) {
        const auto pair = collinear_signal_wavelength(pump, medium.value_or(congruent_lithium_niobate()));
        return py::make_tuple(pair.signal_wavelength, pair.idler_wavelength);
      },
      py::arg("pump"), py::arg("medium") = py::none(), "(signal, idler) wavelengths in m at θ_s = 0.");
  m.def("idler_wavelength", &idler_wavelength_for, py::arg("pump_wavelength"), py::arg("signal_wavelength"));

  py::class_<GridAxes>(m, "GridAxes")
      .def_static("uniform", &GridAxes::uniform, py::arg("wavelength_min"), py::arg("wavelength_max"),
                  py::arg("wavelength_points"), py::arg("max_angle"), py::arg("angle_points"))
      .def_property_readonly("signal_wavelengths", [](const GridAxes& g) { return to_array(g.signal_wavelengths); })
      .def_property_readonly("external_angles", [](const GridAxes& g) { return to_array(g.external_angles); });
  m.def("default_grid", &default_grid, py::arg("config"));

  py::class_<InterferencePattern>(m, "InterferencePattern")
      .def_property_readonly("signal_wavelengths",
                             [](const InterferencePattern& p) { return to_array(p.signal_wavelengths); })
      .def_property_readonly("external_angles", [](const InterferencePattern& p) { return to_array(p.external_angles); })
      .def_property_readonly("intensity",
                             [](const InterferencePattern& p) {
                               py::array_t<double> out({p.rows(), p.columns()});
                               std::copy(p.intensity.begin(), p.intensity.end(), out.mutable_data());
                               return out;
                             })
      .def_readonly("normalization", &InterferencePattern::normalization);

  m.def(
      "pattern",
      [](const SuperlatticeConfig& config, const std::optional<GridAxes>& grid, unsigned threads) {
        py::gil_scoped_release release;
        return pattern(config, grid.value_or(default_grid(config)), {threads});
      },
      py::arg("config"), py::arg("grid") = py::none(), py::arg("threads") = 0u,
      "Normalized intensity over (signal wavelength, external angle).");
  m.def(
      "ensemble_pattern",
      [](const SuperlatticeConfig& base, const PerturbationSpec& spec, const std::optional<GridAxes>& grid,
         unsigned threads) {
        const auto samples = sample_configs(base, spec);
        py::gil_scoped_release release;
        return ensemble_pattern(samples, grid.value_or(default_grid(base)), {threads});
      },
      py::arg("config"), py::arg("spec"), py::arg("grid") = py::none(), py::arg("threads") = 0u);

  py::enum_<Distribution>(m, "Distribution").value("uniform", Distribution::uniform).value("gaussian", Distribution::gaussian);
  py::class_<PerturbationSpec>(m, "PerturbationSpec")
      .def(py::init<>())
      .def_readwrite("cut_angle_tolerance", &PerturbationSpec::cut_angle_tolerance)
      .def_readwrite("crystal_length_tolerance", &PerturbationSpec::crystal_length_tolerance)
      .def_readwrite("gap_length_tolerance", &PerturbationSpec::gap_length_tolerance)
      .def_readwrite("distribution", &PerturbationSpec::distribution)
      .def_readwrite("samples", &PerturbationSpec::samples)
      .def_readwrite("seed", &PerturbationSpec::seed);
  m.def("sample_configs", &sample_configs, py::arg("config"), py::arg("spec"));

  py::class_<CrossSection>(m, "CrossSection")
      .def(py::init([](const py::array_t<double, py::array::c_style | py::array::forcecast>& angles,
                       const py::array_t<double, py::array::c_style | py::array::forcecast>& intensity) {
             CrossSection s;
             s.angles = to_vector(angles);
             s.intensity = to_vector(intensity);
             return s;
           }),
           py::arg("angles"), py::arg("intensity"))
      .def_readonly("center_wavelength", &CrossSection::center_wavelength)
      .def_readonly("averaging_bandwidth", &CrossSection::averaging_bandwidth)
      .def_property_readonly("angles", [](const CrossSection& s) { return to_array(s.angles); })
      .def_property_readonly("intensity", [](const CrossSection& s) { return to_array(s.intensity); });
  m.def("cross_section", &cross_section, py::arg("pattern"), py::arg("center_wavelength"),
        py::arg("bandwidth") = 0.0);

  py::class_<AnalysisWindow>(m, "AnalysisWindow")
      .def(py::init([](double lo, double hi) { return AnalysisWindow{lo, hi}; }),
           py::arg("min_angle") = AnalysisWindow{}.min_angle, py::arg("max_angle") = AnalysisWindow{}.max_angle)
      .def_readwrite("min_angle", &AnalysisWindow::min_angle)
      .def_readwrite("max_angle", &AnalysisWindow::max_angle);

  py::class_<FringeMetrics>(m, "FringeMetrics")
      .def_property_readonly("peak_angles", [](const FringeMetrics& f) { return to_array(f.peak_angles); })
      .def_property_readonly("widths", [](const FringeMetrics& f) { return to_array(f.widths); })
      .def_readonly("visibility", &FringeMetrics::visibility)
      .def_readonly("mean_width", &FringeMetrics::mean_width)
      .def_readonly("window_peaks", &FringeMetrics::window_peaks);
  m.def("fringe_metrics", &fringe_metrics, py::arg("section"), py::arg("window") = AnalysisWindow{});
  m.def("visibility", &visibility, py::arg("section"), py::arg("min_angle"), py::arg("max_angle"));
  m.def("width_ratio", &width_ratio, py::arg("reference"), py::arg("other"));
  m.def(
      "phase_shift",
      [](const CrossSection& reference, const CrossSection& sample, int crystals, const AnalysisWindow& window) {
        const auto s = phase_shift(reference, sample, crystals, window);
        return py::make_tuple(s.value, s.uncertainty);
      },
      py::arg("reference"), py::arg("sample"), py::arg("crystals"), py::arg("window") = AnalysisWindow{},
      "(shift, 1σ uncertainty) in rad.");
  m.def("slope_gain", &slope_gain, py::arg("a"), py::arg("b"), py::arg("window") = AnalysisWindow{});

  m.def("closed_form_intensity", py::vectorize(&closed_form_intensity), py::arg("delta_k_crystal"), py::arg("phi"),
        py::arg("crystals"), py::arg("length"));

  m.def(
      "run_scenario",
      [](const std::filesystem::path& file, const std::optional<std::filesystem::path>& output_dir, unsigned threads,
         std::optional<bool> plots) {
        const auto scenario = parse_scenario(file);
        RunOptions options;
        if (output_dir) options.output_dir = *output_dir;
        options.exec.threads = threads;
        options.emit_plots = plots;
        RunResult result;
        {
          py::gil_scoped_release release;
          result = run(scenario, options);
        }
        py::list tasks;
        for (const auto& t : result.tasks) {
          py::dict d;
          d["name"] = t.name;
          d["type"] = std::string(to_string(t.type));
          d["ok"] = t.ok;
          d["files"] = t.files;
          d["seconds"] = t.seconds;
          d["error"] = t.error;
          tasks.append(d);
        }
        py::dict out;
        out["exit_code"] = result.exit_code;
        out["output_dir"] = result.output_dir;
        out["error"] = result.error;
        out["wall_time"] = result.wall_time;
        out["tasks"] = tasks;
        return out;
      },
      py::arg("scenario"), py::arg("output_dir") = py::none(), py::arg("threads") = 0u, py::arg("plots") = py::none(),
      "Run a scenario file; returns a dict with exit_code, output_dir, error, wall_time and tasks.");

  m.def(
      "regression_check",
      [](const std::filesystem::path& golden, const std::filesystem::path& fresh, double tolerance) {
        const auto report = regression_check(golden, fresh, tolerance);
        return py::make_tuple(report.pass, format_report(report));
      },
      py::arg("golden"), py::arg("fresh"), py::arg("tolerance") = kDefaultRegressionTolerance,
      "(passed, report text).");
}
