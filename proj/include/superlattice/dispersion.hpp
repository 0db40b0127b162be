#pragma once

// Refractive-index models: Sellmeier dispersion of the uniaxial nonlinear
// crystal, and the (possibly absorbing) medium filling the gaps between
// crystals. All wavelengths are vacuum wavelengths in meters.

#include <array>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace superlattice {

// n² − 1 = Σ_j A_j λ² / (λ² − B_j), λ in μm, B_j in μm².
struct ThreeTermSellmeier {
  std::array<double, 3> strengths{};
  std::array<double, 3> poles_um2{};

  bool operator==(const ThreeTermSellmeier&) const = default;
};

// Temperature-dependent extended Sellmeier form used for MgO-doped lithium
// niobate:
//   n² = a1 + b1 f + (a2 + b2 f)/(λ² − (a3 + b3 f)²) + (a4 + b4 f)/(λ² − a5²) − a6 λ²
// with f = (T − 24.5 °C)(T + 570.82 °C), λ in μm.
struct TemperatureSellmeier {
  std::array<double, 6> a{};
  std::array<double, 4> b{};

  bool operator==(const TemperatureSellmeier&) const = default;
};

using SellmeierCoefficients = std::variant<ThreeTermSellmeier, TemperatureSellmeier>;

struct UniaxialMedium {
  std::string label;
  SellmeierCoefficients ordinary;
  SellmeierCoefficients extraordinary;
  double temperature = 298.15;  // kelvin
  double band_min = 0.4e-6;     // meters
  double band_max = 5.0e-6;

  bool operator==(const UniaxialMedium&) const = default;
};

// Undoped congruent lithium niobate, three-term infrared-corrected Sellmeier
// set (Zelmon, Small & Jundt, JOSA B 14, 3319 (1997)), 0.4-5.0 μm. Default.
UniaxialMedium congruent_lithium_niobate();

// 5 mol% MgO-doped congruent lithium niobate, temperature-dependent set
// (Gayer et al., Appl. Phys. B 91, 343 (2008)) evaluated at 25 °C.
UniaxialMedium mgo_lithium_niobate();

// Lookup of the built-in sets by the names used in scenario files.
std::optional<UniaxialMedium> builtin_medium(std::string_view name);
std::vector<std::string> builtin_medium_names();

double ordinary_index(const UniaxialMedium& medium, double wavelength);
double extraordinary_index(const UniaxialMedium& medium, double wavelength);

// Index of an extraordinary wave whose wavevector makes `polar_angle` with
// the optic axis: 1/n² = cos²θ/n_o² + sin²θ/n_e².
double extraordinary_index_at_angle(const UniaxialMedium& medium, double wavelength,
                                    double polar_angle);

// Single resonant Lorentz line on a constant background. The line is
// Lorentzian in wavenumber (1/λ); `linewidth` is its FWHM expressed in
// wavelength at the resonance.
struct GasModel {
  double background_index = 1.0;
  double resonance_wavelength = 4.27e-6;  // m
  double linewidth = 20e-9;               // m, FWHM
  double peak_absorption = 0.0;           // 1/m, intensity attenuation at reference concentration
  double reference_concentration = 2e-4;  // fraction
  double concentration = 0.0;             // fraction

  bool operator==(const GasModel&) const = default;
};

// ñ = n + iκ with κ(resonance) = α_peak (c/c_ref) λ₀/(4π); Im ñ ≥ 0.
std::complex<double> gas_complex_index(const GasModel& gas, double wavelength);

// Complex line shape L(λ) of the gas model: Im L = 1 and Re L = 0 on resonance,
// Im L even and Re L odd in wavenumber detuning.
std::complex<double> gas_line_shape(const GasModel& gas, double wavelength);

// CO₂-like line at 4.27 μm with the given concentration and peak absorption.
GasModel co2_like_gas(double concentration, double peak_absorption);

// Returns `base` with peak_absorption rescaled so that the real index
// deviation at `idler_wavelength` advances the idler phase across one gap of
// `gap_length` by `target_phase` radians: (2π/λ_i)·Δn·l′ = target_phase.
GasModel calibrate_gas_phase(GasModel base, double target_phase, double idler_wavelength,
                             double gap_length);

// Medium filling a gap (or a removed-crystal slot). Either a constant index
// (air/vacuum by default), a gas model, or an arbitrary complex-index function.
class GapMedium {
 public:
  struct Constant {
    double index = 1.0;
    bool operator==(const Constant&) const = default;
  };
  struct Custom {
    std::shared_ptr<const std::function<std::complex<double>(double)>> index;
    bool operator==(const Custom& other) const { return index == other.index; }
  };
  using Model = std::variant<Constant, GasModel, Custom>;

  GapMedium() = default;

  static GapMedium constant(double index, std::string label = "air");
  static GapMedium gas(const GasModel& model, std::string label = "gas");
  static GapMedium custom(std::function<std::complex<double>(double)> index, std::string label);

  std::complex<double> index(double wavelength) const;

  const Model& model() const noexcept { return model_; }
  const std::string& label() const noexcept { return label_; }

  bool operator==(const GapMedium&) const = default;

 private:
  GapMedium(Model model, std::string label) : model_(std::move(model)), label_(std::move(label)) {}

  Model model_{Constant{}};
  std::string label_{"air"};
};

}  // namespace superlattice
