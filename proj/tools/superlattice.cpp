// Command-line front end: run scenario files, compare run directories and
// print collinear phase-matching wavelengths.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <numbers>

#include "superlattice/errors.hpp"
#include "superlattice/phasematch.hpp"
#include "superlattice/regression.hpp"
#include "superlattice/runner.hpp"

using namespace superlattice;

namespace {

int simulate(const std::string& file, const std::string& out, unsigned threads, bool plots,
             const std::vector<std::size_t>& grid_points) {
  Scenario scenario;
  try {
    scenario = parse_scenario(file);
    if (!grid_points.empty()) {
      scenario.grid.wavelength_points = grid_points.at(0);
      scenario.grid.angle_points = grid_points.at(1);
      validate(scenario);
    }
  } catch (const ScenarioParseError& e) {
    fmt::print(stderr, "parse error: {}\n", e.what());
    return kExitValidation;
  } catch (const ValidationError& e) {
    fmt::print(stderr, "invalid scenario: {}\n", e.what());
    return kExitValidation;
  }
  RunOptions options;
  options.output_dir = out;
  options.exec.threads = threads;
  if (plots) options.emit_plots = true;
  const auto result = run(scenario, options);
  for (const auto& t : result.tasks) {
    fmt::print("{:<14} {:<24} {:>8.2f} s  {}\n", to_string(t.type), t.name, t.seconds, t.ok ? "ok" : "FAILED");
  }
  if (result.exit_code != kExitSuccess) {
    fmt::print(stderr, "error: {}\n", result.error);
  } else {
    fmt::print("wrote {} (config {}, {:.2f} s)\n", result.output_dir.string(), format_hash(config_hash(scenario)),
               result.wall_time);
  }
  return result.exit_code;
}

int check(const std::string& golden, const std::string& fresh, double tolerance) {
  const auto report = regression_check(golden, fresh, tolerance);
  fmt::print("{}", format_report(report));
  return report.pass ? kExitSuccess : kExitRegression;
}

int phasematch(double theta_c_deg, double pump_nm, double diameter_mm, const std::string& medium_name) {
  const auto medium = builtin_medium(medium_name);
  if (!medium) {
    fmt::print(stderr, "unknown medium '{}'\n", medium_name);
    return kExitValidation;
  }
  const PumpSpec pump{pump_nm * 1e-9, diameter_mm * 1e-3, theta_c_deg * std::numbers::pi / 180.0};
  try {
    validate(pump);
    const auto pair = collinear_signal_wavelength(pump, *medium);
    fmt::print("signal_nm = {:.4f}\nidler_nm = {:.3f}\n", pair.signal_wavelength * 1e9, pair.idler_wavelength * 1e9);
  } catch (const ValidationError& e) {
    fmt::print(stderr, "invalid input: {}\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitComputation;
  }
  return kExitSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interference patterns of nonlinear crystal superlattices"};
  app.set_version_flag("--version", SUPERLATTICE_VERSION);
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Run the tasks of a scenario file");
  std::string scenario_file;
  std::string out_dir;
  unsigned threads = 0;
  bool plots = false;
  std::vector<std::size_t> grid_points;
  sim->add_option("scenario", scenario_file, "Scenario file (TOML)")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out_dir, "Output directory (default: the scenario's output_dir)");
  sim->add_option("--threads", threads, "Worker threads, 0 for all cores");
  sim->add_flag("--plots", plots, "Also write SVG figures");
  sim->add_option("--grid-points", grid_points, "Override the grid as WAVELENGTHS,ANGLES")
      ->expected(2)
      ->delimiter(',');

  auto* chk = app.add_subcommand("check", "Compare a fresh run directory against a golden one");
  std::string golden_dir;
  std::string fresh_dir;
  double tolerance = kDefaultRegressionTolerance;
  chk->add_option("--golden", golden_dir, "Golden run directory")->required()->check(CLI::ExistingDirectory);
  chk->add_option("--fresh", fresh_dir, "Fresh run directory")->required()->check(CLI::ExistingDirectory);
  chk->add_option("--tol", tolerance, "Relative tolerance")->check(CLI::PositiveNumber);

  auto* pm = app.add_subcommand("phasematch", "Print the collinear signal and idler wavelengths");
  double theta_c = 0.0;
  double pump_nm = 0.0;
  double diameter_mm = 3.0;
  std::string medium = "lithium_niobate_congruent";
  pm->add_option("--theta-c", theta_c, "Cut angle (deg)")->required();
  pm->add_option("--pump", pump_nm, "Pump wavelength (nm)")->required();
  pm->add_option("--beam-diameter", diameter_mm, "Pump beam diameter (mm)");
  pm->add_option("--medium", medium, "Built-in crystal medium");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitSuccess : kExitValidation;
  }

  if (*sim) return simulate(scenario_file, out_dir, threads, plots, grid_points);
  if (*chk) return check(golden_dir, fresh_dir, tolerance);
  return phasematch(theta_c, pump_nm, diameter_mm, medium);
}
