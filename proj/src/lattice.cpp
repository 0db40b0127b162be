#include "superlattice/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/core.h>

#include "superlattice/errors.hpp"

namespace superlattice {

std::size_t SuperlatticeConfig::enabled_count() const {
  return static_cast<std::size_t>(
      std::count_if(crystals.begin(), crystals.end(), [](const CrystalElement& c) { return c.enabled; }));
}

void validate(const PumpSpec& pump) {
  if (!(pump.wavelength > 0.0)) throw ValidationError("must be positive", "pump.wavelength");
  if (!(pump.beam_diameter > 0.0)) throw ValidationError("must be positive", "pump.beam_diameter");
  if (!(pump.cut_angle > 0.0 && pump.cut_angle < std::numbers::pi / 2)) {
    throw ValidationError("must lie in (0, 90) deg", "pump.cut_angle");
  }
}

void validate(const SuperlatticeConfig& config) {
  validate(config.pump);
  if (config.crystals.empty()) throw ValidationError("at least one crystal is required", "crystals");
  if (config.gaps.size() + 1 != config.crystals.size()) {
    throw ValidationError(fmt::format("{} crystals need exactly {} gaps, got {}", config.crystals.size(),
                                      config.crystals.size() - 1, config.gaps.size()),
                          "gaps");
  }
  for (std::size_t i = 0; i < config.crystals.size(); ++i) {
    const auto& c = config.crystals[i];
    if (!(c.length > 0.0)) throw ValidationError("length must be positive", fmt::format("crystals[{}]", i));
    const double angle = config.pump.cut_angle + c.cut_angle_offset;
    if (!(angle >= 0.0 && angle <= std::numbers::pi / 2)) {
      throw ValidationError("cut angle plus offset leaves [0, 90] deg", fmt::format("crystals[{}]", i));
    }
  }
  for (std::size_t i = 0; i < config.gaps.size(); ++i) {
    if (!(config.gaps[i].length >= 0.0)) {
      throw ValidationError("length must be non-negative", fmt::format("gaps[{}]", i));
    }
  }
}

SuperlatticeConfig uniform_lattice(const PumpSpec& pump, std::size_t crystal_count, double crystal_length,
                                   double gap_length, const GapMedium& gap_medium,
                                   const UniaxialMedium& crystal_medium) {
  SuperlatticeConfig config;
  config.pump = pump;
  config.crystal_medium = crystal_medium;
  config.crystals.assign(crystal_count, CrystalElement{crystal_length, 0.0, true});
  if (crystal_count > 1) config.gaps.assign(crystal_count - 1, GapElement{gap_length, gap_medium});
  return config;
}

const GapMedium& detection_medium(const SuperlatticeConfig& config) {
  static const GapMedium vacuum = GapMedium::constant(1.0, "vacuum");
  return config.gaps.empty() ? vacuum : config.gaps.front().medium;
}

}  // namespace superlattice
