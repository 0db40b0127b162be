#pragma once

// Tolerance Monte Carlo over superlattice geometry.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "superlattice/interference.hpp"

namespace superlattice {

enum class Distribution { uniform, gaussian };

std::string_view to_string(Distribution d);
Distribution distribution_from_string(std::string_view name);

// Tolerances are half-widths of a uniform distribution, or 1σ of a gaussian.
struct PerturbationSpec {
  double cut_angle_tolerance = 0.0;       // rad, per crystal
  double crystal_length_tolerance = 0.0;  // m, per crystal
  double gap_length_tolerance = 0.0;      // m, per gap
  Distribution distribution = Distribution::uniform;
  std::size_t samples = 1;
  std::uint64_t seed = 0;

  bool operator==(const PerturbationSpec&) const = default;
};

void validate(const PerturbationSpec& spec);

enum class PerturbedQuantity : std::uint32_t { cut_angle = 0, crystal_length = 1, gap_length = 2 };

// Unit variate for one (sample, element, quantity) triple: uniform on
// [−1, 1) or standard normal. Counter-based, so any subset of the stream can
// be drawn in any order, and the same seed pairs draws across tolerance
// levels.
double unit_variate(std::uint64_t seed, std::uint64_t sample, std::uint64_t element, PerturbedQuantity quantity,
                    Distribution distribution);

// One perturbed copy of `base` per sample. Gap lengths are clipped at zero.
std::vector<SuperlatticeConfig> sample_configs(const SuperlatticeConfig& base, const PerturbationSpec& spec);

// Mean of the per-sample intensities before normalization, then normalized.
// Samples are summed pairwise in list order, so the result does not depend
// on the thread count.
InterferencePattern ensemble_pattern(const std::vector<SuperlatticeConfig>& samples, const GridAxes& grid,
                                     const ExecutionOptions& exec = {});

}  // namespace superlattice
