#pragma once

// Observables extracted from interference patterns: band-averaged
// cross-sections, fringe positions and widths, visibility, the fringe phase
// displacement between two sections and the slope gain.

#include <cstddef>
#include <numbers>
#include <vector>

#include "superlattice/interference.hpp"

namespace superlattice {

struct CrossSection {
  double center_wavelength = 0.0;    // m
  double averaging_bandwidth = 0.0;  // m, full width
  std::vector<double> angles;        // rad
  std::vector<double> intensity;     // max 1
};

// Peaks whose |θ| falls in [min_angle, max_angle] enter mean widths.
struct AnalysisWindow {
  double min_angle = 0.2 * std::numbers::pi / 180.0;
  double max_angle = 0.8 * std::numbers::pi / 180.0;

  bool operator==(const AnalysisWindow&) const = default;
};

struct FringeMetrics {
  std::vector<double> peak_angles;  // principal maxima, ascending
  std::vector<double> widths;       // per peak, distance to the nearest minimum
  double visibility = 0.0;          // over the window
  double mean_width = 0.0;          // over peaks inside the window
  std::size_t window_peaks = 0;
};

// Mean of the rows within ±bandwidth/2 of the center, renormalized to max 1.
// A zero bandwidth selects the nearest row.
CrossSection cross_section(const InterferencePattern& pattern, double center_wavelength, double bandwidth);

// Principal maxima: local maxima with a local minimum on either side whose
// prominence exceeds 1% of the section range and 30% of the prominence of
// each neighbouring maximum (this drops the N − 2 secondary maxima between
// principal fringes). Extremum positions are refined by a 3-point parabola.
FringeMetrics fringe_metrics(const CrossSection& section, const AnalysisWindow& window = {});

// (I_max − I_min)/(I_max + I_min) over samples with min_angle ≤ |θ| ≤ max_angle.
double visibility(const CrossSection& section, double min_angle, double max_angle);

struct WidthRatio {
  std::size_t crystals = 0;
  double mean_width = 0.0;  // rad
  double ratio = 0.0;       // mean width of the first config over this one
};

double width_ratio(const FringeMetrics& reference, const FringeMetrics& other);

// Patterns for each config on the same grid, sectioned at the same center
// and bandwidth; ratios are taken against the first config.
std::vector<WidthRatio> width_ratio_curve(const std::vector<SuperlatticeConfig>& configs, const GridAxes& grid,
                                          double center_wavelength, double bandwidth,
                                          const AnalysisWindow& window = {}, const ExecutionOptions& exec = {});

struct PhaseFit {
  double offset = 0.0;       // rad, fringe phase at θ = 0
  double curvature = 0.0;    // rad, φ change at |θ| = window.max_angle (quadratic part)
  double quartic = 0.0;      // rad, quartic part at |θ| = window.max_angle
  double uncertainty = 0.0;  // 1σ of offset
  double rms_residual = 0.0;
};

// Fits I(θ) = P(s²)·K_N(δ + c·s² + d·s⁴) + Q(s²), s = θ/window.max_angle,
// K_N the normalized N-crystal fringe factor, P quartic and Q quadratic, over
// |θ| ≤ window.max_angle.
PhaseFit fit_fringe_phase(const CrossSection& section, int crystals, const AnalysisWindow& window = {});

struct PhaseShift {
  double value = 0.0;        // rad in (−π, π]; positive when the sample's φ is smaller
  double uncertainty = 0.0;  // 1σ
};

// Fringe-phase displacement of `sample` relative to `reference`. The fringe
// curvature is taken from the reference fit and held fixed for both offsets.
PhaseShift phase_shift(const CrossSection& reference, const CrossSection& sample, int crystals,
                       const AnalysisWindow& window = {});

// Ratio of the maximum central-difference |dI/dθ| of b over that of a within
// the window.
double slope_gain(const CrossSection& a, const CrossSection& b, const AnalysisWindow& window = {});

}  // namespace superlattice
