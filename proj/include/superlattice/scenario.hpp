#pragma once

// Scenario files: a TOML description of one superlattice geometry, the
// simulation grid and an ordered list of tasks. Every physical quantity is a
// string carrying an explicit unit, e.g. "532 nm", "8.2 mm", "50.34 deg".

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "superlattice/analysis.hpp"
#include "superlattice/perturb.hpp"

namespace superlattice {

inline constexpr int kScenarioSchemaVersion = 1;

// Parses "<number> <unit>" into base SI units. Accepted units: nm, um, mm,
// cm, m (length); deg, mrad, rad, pi (angle, "pi" meaning multiples of π);
// 1/m, 1/cm (attenuation); K (temperature); %, ppm, fraction (ratios).
// Throws UnitError naming `key` when the unit is missing or does not belong
// to `dimension`. Decimal prefixes are applied to the decimal literal before
// rounding, so "8.2 mm" and "8200 um" give the same double.
enum class Dimension { length, angle, attenuation, temperature, ratio };
double parse_quantity(std::string_view text, Dimension dimension, const std::string& key);

enum class TaskType { pattern, cross_section, metrics, width_ratio, perturb, gas_compare, defect };
std::string_view to_string(TaskType type);

enum class GapKind { air, constant, gas };
std::string_view to_string(GapKind kind);

struct GasSpec {
  double background_index = 1.0;
  double resonance_wavelength = 4.27e-6;
  double linewidth = 20e-9;
  double reference_concentration = 2e-4;
  double concentration = 2e-4;
  // Either an explicit peak absorption, or a target phase per gap at the
  // idler conjugate to `calibration_signal`.
  std::optional<double> peak_absorption;
  std::optional<double> phase_target;
  std::optional<double> calibration_signal;

  bool operator==(const GasSpec&) const = default;
};

struct GridSpec {
  std::optional<double> center;  // default: collinear signal wavelength
  double half_band = kDefaultHalfBand;
  std::size_t wavelength_points = kDefaultWavelengthPoints;
  double max_angle = kDefaultMaxAngle;
  std::size_t angle_points = kDefaultAnglePoints;

  bool operator==(const GridSpec&) const = default;
};

struct TaskSpec {
  TaskType type = TaskType::pattern;
  std::string name;

  // Geometry overrides.
  std::optional<std::size_t> crystals;
  std::vector<std::size_t> disabled;  // 1-based crystal positions
  std::optional<GapKind> gap_medium;
  std::optional<double> cut_angle;
  std::optional<double> gap_length;
  std::optional<std::size_t> perturbed_gap;  // 1-based; shifted by gap_shift
  double gap_shift = 0.0;

  // Section and analysis parameters.
  std::optional<double> center;
  double bandwidth = 0.0;
  AnalysisWindow window;
  std::vector<std::size_t> crystal_counts;  // width_ratio
  std::optional<PerturbationSpec> perturbation;
  bool dense = false;  // pattern tasks: also write the dense matrix

  bool operator==(const TaskSpec&) const = default;
};

struct Scenario {
  int schema_version = kScenarioSchemaVersion;
  PumpSpec pump;
  std::string crystal_medium_name = "lithium_niobate_congruent";  // or "custom"
  UniaxialMedium crystal_medium = congruent_lithium_niobate();
  std::size_t crystals = 2;
  double crystal_length = 1e-3;
  double gap_length = 0.0;
  std::vector<double> gap_lengths;  // explicit per-gap lengths; empty: all gap_length
  GapKind gap_medium = GapKind::air;
  double gap_index = 1.0;
  std::optional<GasSpec> gas;
  GridSpec grid;
  std::vector<TaskSpec> tasks;
  std::string output_dir;
  bool emit_plots = false;

  bool operator==(const Scenario&) const = default;
};

// Throws ValidationError (key-qualified) or ScenarioParseError.
Scenario parse_scenario(const std::filesystem::path& file);
Scenario parse_scenario_text(std::string_view text, std::string_view source = "scenario");

// Canonical TOML; parse_scenario_text(serialize(s)) == s.
std::string serialize(const Scenario& scenario);

// FNV-1a over the canonical serialization with output_dir and emit_plots
// cleared.
std::uint64_t config_hash(const Scenario& scenario);

void validate(const Scenario& scenario);

GasModel resolve_gas(const Scenario& scenario);
GapMedium gap_medium_for(const Scenario& scenario, GapKind kind);

// The scenario's base geometry and the geometry seen by one task.
SuperlatticeConfig base_config(const Scenario& scenario);
SuperlatticeConfig task_config(const Scenario& scenario, const TaskSpec& task);
GridAxes grid_axes(const Scenario& scenario, const SuperlatticeConfig& config);

class ScenarioParseError : public std::runtime_error {
 public:
  ScenarioParseError(const std::string& message, std::size_t line, std::size_t column)
      : std::runtime_error(message), line_(line), column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace superlattice
