#include "superlattice/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>
#include <fmt/core.h>

#include "superlattice/errors.hpp"

namespace superlattice {
namespace {

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// 53-bit uniform in (0, 1).
double open_unit(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

void add_in_place(std::vector<double>& into, const std::vector<double>& from) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += from[i];
}

}  // namespace

std::string_view to_string(Distribution d) { return d == Distribution::uniform ? "uniform" : "gaussian"; }

Distribution distribution_from_string(std::string_view name) {
  if (name == "uniform") return Distribution::uniform;
  if (name == "gaussian") return Distribution::gaussian;
  throw ValidationError(fmt::format("unknown distribution '{}' (uniform or gaussian)", name), "distribution");
}

void validate(const PerturbationSpec& spec) {
  if (!(spec.cut_angle_tolerance >= 0.0)) throw ValidationError("must be non-negative", "cut_angle_tolerance");
  if (!(spec.crystal_length_tolerance >= 0.0)) {
    throw ValidationError("must be non-negative", "crystal_length_tolerance");
  }
  if (!(spec.gap_length_tolerance >= 0.0)) throw ValidationError("must be non-negative", "gap_length_tolerance");
  if (spec.samples < 1) throw ValidationError("must be at least 1", "samples");
}

double unit_variate(std::uint64_t seed, std::uint64_t sample, std::uint64_t element, PerturbedQuantity quantity,
                    Distribution distribution) {
  std::uint64_t h = mix(seed);
  h = mix(h ^ sample);
  h = mix(h ^ element);
  h = mix(h ^ static_cast<std::uint64_t>(quantity));
  const double u = open_unit(h);
  if (distribution == Distribution::uniform) return 2.0 * u - 1.0;
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

std::vector<SuperlatticeConfig> sample_configs(const SuperlatticeConfig& base, const PerturbationSpec& spec) {
  validate(base);
  validate(spec);
  std::vector<SuperlatticeConfig> out(spec.samples, base);
  for (std::size_t s = 0; s < spec.samples; ++s) {
    auto& config = out[s];
    auto draw = [&](std::size_t element, PerturbedQuantity q) {
      return unit_variate(spec.seed, s, element, q, spec.distribution);
    };
    for (std::size_t i = 0; i < config.crystals.size(); ++i) {
      auto& c = config.crystals[i];
      c.cut_angle_offset += spec.cut_angle_tolerance * draw(i, PerturbedQuantity::cut_angle);
      c.length += spec.crystal_length_tolerance * draw(i, PerturbedQuantity::crystal_length);
    }
    for (std::size_t j = 0; j < config.gaps.size(); ++j) {
      auto& g = config.gaps[j];
      g.length = std::max(0.0, g.length + spec.gap_length_tolerance * draw(j, PerturbedQuantity::gap_length));
    }
    validate(config);
  }
  return out;
}

InterferencePattern ensemble_pattern(const std::vector<SuperlatticeConfig>& samples, const GridAxes& grid,
                                     const ExecutionOptions& exec) {
  if (samples.empty()) throw ValidationError("ensemble needs at least one sample", "samples");
  validate(grid);
  // Binary-counter pairwise summation: level k holds the sum of 2^k samples.
  std::vector<std::vector<double>> levels;
  std::vector<bool> occupied;
  std::vector<std::uint8_t> evanescent;
  for (const auto& config : samples) {
    std::vector<std::uint8_t> flags;
    auto carry = raw_pattern(config, grid, exec, &flags);
    if (evanescent.empty()) {
      evanescent = std::move(flags);
    } else {
      for (std::size_t i = 0; i < evanescent.size(); ++i) evanescent[i] &= flags[i];
    }
    std::size_t level = 0;
    while (level < occupied.size() && occupied[level]) {
      add_in_place(carry, levels[level]);
      occupied[level] = false;
      ++level;
    }
    if (level == occupied.size()) {
      levels.emplace_back();
      occupied.push_back(false);
    }
    levels[level] = std::move(carry);
    occupied[level] = true;
  }
  std::vector<double> total;
  for (std::size_t level = 0; level < levels.size(); ++level) {
    if (!occupied[level]) continue;
    if (total.empty()) {
      total = std::move(levels[level]);
    } else {
      add_in_place(total, levels[level]);
    }
  }
  const double count = static_cast<double>(samples.size());
  for (auto& v : total) v /= count;
  return normalized_pattern(grid, std::move(total), std::move(evanescent));
}

}  // namespace superlattice
