#pragma once

#include <cstddef>
#include <vector>

#include "superlattice/dispersion.hpp"

namespace superlattice {

struct PumpSpec {
  double wavelength = 532e-9;   // m
  double beam_diameter = 3e-3;  // m
  double cut_angle = 0.0;       // rad, pump direction to optic axis

  bool operator==(const PumpSpec&) const = default;
};

struct CrystalElement {
  double length = 1e-3;           // m
  double cut_angle_offset = 0.0;  // rad, added to the pump-level cut angle
  bool enabled = true;

  bool operator==(const CrystalElement&) const = default;
};

struct GapElement {
  double length = 0.0;  // m
  GapMedium medium;

  bool operator==(const GapElement&) const = default;
};

// Crystals and gaps alternate: crystal[0], gap[0], crystal[1], ..., crystal[N-1].
// A disabled crystal emits nothing; its slot is traversed as the medium of the
// gap preceding it.
struct SuperlatticeConfig {
  PumpSpec pump;
  UniaxialMedium crystal_medium = congruent_lithium_niobate();
  std::vector<CrystalElement> crystals;
  std::vector<GapElement> gaps;

  std::size_t enabled_count() const;

  bool operator==(const SuperlatticeConfig&) const = default;
};

// Throws ValidationError naming the first violated invariant.
void validate(const PumpSpec& pump);
void validate(const SuperlatticeConfig& config);

// N identical crystals of length `crystal_length` separated by N-1 equal gaps.
SuperlatticeConfig uniform_lattice(const PumpSpec& pump, std::size_t crystal_count,
                                   double crystal_length, double gap_length,
                                   const GapMedium& gap_medium = {},
                                   const UniaxialMedium& crystal_medium = congruent_lithium_niobate());

// Medium in which detection angles are measured: the first gap's medium, or
// vacuum for a single crystal.
const GapMedium& detection_medium(const SuperlatticeConfig& config);

}  // namespace superlattice
