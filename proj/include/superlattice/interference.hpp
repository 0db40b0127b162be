#pragma once

// Biphoton amplitude engine for crystal superlattices.
//
// Crystal n contributes f_n = A(Δk_n l_n)·exp(−i Re ψ_n), with
// A(x) = (1 − e^{−ix})/(ix) and ψ_n the mismatch phase accumulated from the
// front of the lattice up to the front face of crystal n. The detected signal
// intensity is
//
//   I = Σ_{n,m} f_n f_m* T_nm,   T_nm = exp(−|Im ψ_n − Im ψ_m|),
//
// where T_nm is the idler amplitude transmission between the two emission
// sites. For lossless gaps T_nm = 1 and I = |Σ f_n|².

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "superlattice/lattice.hpp"
#include "superlattice/phasematch.hpp"

namespace superlattice {

struct GridAxes {
  std::vector<double> signal_wavelengths;  // m, strictly increasing
  std::vector<double> external_angles;     // rad, strictly increasing

  // Inclusive linear axes; angles span [−max_angle, max_angle].
  static GridAxes uniform(double wavelength_min, double wavelength_max, std::size_t wavelength_points,
                          double max_angle, std::size_t angle_points);

  bool operator==(const GridAxes&) const = default;
};

void validate(const GridAxes& grid);

// 801 wavelengths over the collinear signal wavelength ± 5 nm and 601 angles
// over ±0.85 deg.
inline constexpr std::size_t kDefaultWavelengthPoints = 801;
inline constexpr std::size_t kDefaultAnglePoints = 601;
inline constexpr double kDefaultHalfBand = 5e-9;
inline constexpr double kDefaultMaxAngle = 0.85 * std::numbers::pi / 180.0;
GridAxes default_grid(const SuperlatticeConfig& config);

struct InterferencePattern {
  std::vector<double> signal_wavelengths;
  std::vector<double> external_angles;
  std::vector<double> intensity;       // row-major [wavelength][angle], in [0, 1]
  std::vector<std::uint8_t> evanescent;  // same layout; 1 where no propagating idler exists
  double normalization = 0.0;          // maximum before normalization

  std::size_t rows() const noexcept { return signal_wavelengths.size(); }
  std::size_t columns() const noexcept { return external_angles.size(); }
  double at(std::size_t row, std::size_t column) const { return intensity[row * columns() + column]; }
  std::span<const double> row(std::size_t index) const {
    return {intensity.data() + index * columns(), columns()};
  }
};

struct ExecutionOptions {
  unsigned threads = 0;  // 0: hardware concurrency
};

// (1 − e^{−iΔk·l})/(iΔk·l); first-order series below |Δk·l| < 1e-8.
std::complex<double> single_crystal_amplitude(double delta_k_crystal, double length);

// ψ_n for every enabled crystal, in lattice order. Per-crystal cut-angle
// offsets change that crystal's Δk; disabled slots and gaps add Δk′·length at
// the mismatch of their medium.
std::vector<std::complex<double>> accumulated_phases(const SuperlatticeConfig& config,
                                                     const KinematicPoint& point);

// Intensity before normalization at one node.
double node_intensity(const SuperlatticeConfig& config, const KinematicPoint& point);

// Intensities before normalization over the grid, row-major. Evanescent nodes
// are 0 and flagged in `evanescent` when provided.
std::vector<double> raw_pattern(const SuperlatticeConfig& config, const GridAxes& grid,
                                const ExecutionOptions& exec = {},
                                std::vector<std::uint8_t>* evanescent = nullptr);

InterferencePattern pattern(const SuperlatticeConfig& config, const GridAxes& grid,
                            const ExecutionOptions& exec = {});

// Wraps raw intensities into a pattern normalized to its maximum.
InterferencePattern normalized_pattern(const GridAxes& grid, std::vector<double> raw,
                                       std::vector<std::uint8_t> evanescent = {});

// {sinc(Δk·l/2)·sin(Nφ/2)/sin(φ/2)}², with the limit N² at φ = 2πm.
double closed_form_intensity(double delta_k_crystal, double phi, int n_crystals, double length);

// Five equal crystals with the third removed (its slot filled by the gap
// medium), lossless gaps:
//   16·sinc²(Δk l/2)·cos²(φ/2)·cos²(ψ₄/2),  ψ₄ = 3φ − (Δk − Δk′)·l.
double defect_closed_form(const KinematicPoint& point, double crystal_length, double gap_length);

// Runs fn(row) for each row in [0, rows) on up to `threads` workers.
void parallel_rows(std::size_t rows, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace superlattice
