#include "superlattice/dispersion.hpp"

#include <cmath>
#include <numbers>

#include <fmt/core.h>

#include "superlattice/errors.hpp"

namespace superlattice {
namespace {

constexpr double kCelsiusOffset = 273.15;

double squared_index(const ThreeTermSellmeier& s, double lambda_um, double /*temperature*/) {
  const double l2 = lambda_um * lambda_um;
  double n2 = 1.0;
  for (std::size_t j = 0; j < 3; ++j) n2 += s.strengths[j] * l2 / (l2 - s.poles_um2[j]);
  return n2;
}

double squared_index(const TemperatureSellmeier& s, double lambda_um, double temperature) {
  const double t = temperature - kCelsiusOffset;
  const double f = (t - 24.5) * (t + 570.82);
  const double l2 = lambda_um * lambda_um;
  const double uv_pole = s.a[2] + s.b[2] * f;
  return s.a[0] + s.b[0] * f + (s.a[1] + s.b[1] * f) / (l2 - uv_pole * uv_pole) +
         (s.a[3] + s.b[3] * f) / (l2 - s.a[4] * s.a[4]) - s.a[5] * l2;
}

void check_band(const UniaxialMedium& medium, double wavelength) {
  if (!(wavelength >= medium.band_min && wavelength <= medium.band_max)) {
    throw DomainError(fmt::format("wavelength {:.6g} nm outside the supported band {:.6g}-{:.6g} nm of {}",
                                  wavelength * 1e9, medium.band_min * 1e9, medium.band_max * 1e9,
                                  medium.label));
  }
}

double evaluate(const SellmeierCoefficients& coefficients, double wavelength, double temperature) {
  const double lambda_um = wavelength * 1e6;
  const double n2 = std::visit([&](const auto& s) { return squared_index(s, lambda_um, temperature); },
                               coefficients);
  return std::sqrt(n2);
}

}  // namespace

UniaxialMedium congruent_lithium_niobate() {
  UniaxialMedium m;
  m.label = "lithium_niobate_congruent";
  m.ordinary = ThreeTermSellmeier{{2.6734, 1.2290, 12.614}, {0.01764, 0.05914, 474.60}};
  m.extraordinary = ThreeTermSellmeier{{2.9804, 0.5981, 8.9543}, {0.02047, 0.0666, 416.08}};
  m.temperature = 294.15;
  return m;
}

UniaxialMedium mgo_lithium_niobate() {
  UniaxialMedium m;
  m.label = "lithium_niobate_mgo5";
  m.ordinary = TemperatureSellmeier{{5.653, 0.1185, 0.2091, 89.61, 10.85, 1.97e-2},
                                    {7.941e-7, 3.134e-8, -4.641e-9, -2.188e-6}};
  m.extraordinary = TemperatureSellmeier{{5.756, 0.0983, 0.2020, 189.32, 12.52, 1.32e-2},
                                         {2.860e-6, 4.700e-8, 6.113e-8, 1.516e-4}};
  m.temperature = 298.15;
  return m;
}

std::optional<UniaxialMedium> builtin_medium(std::string_view name) {
  if (name == "lithium_niobate_congruent") return congruent_lithium_niobate();
  if (name == "lithium_niobate_mgo5") return mgo_lithium_niobate();
  return std::nullopt;
}

std::vector<std::string> builtin_medium_names() {
  return {"lithium_niobate_congruent", "lithium_niobate_mgo5"};
}

double ordinary_index(const UniaxialMedium& medium, double wavelength) {
  check_band(medium, wavelength);
  return evaluate(medium.ordinary, wavelength, medium.temperature);
}

double extraordinary_index(const UniaxialMedium& medium, double wavelength) {
  check_band(medium, wavelength);
  return evaluate(medium.extraordinary, wavelength, medium.temperature);
}

double extraordinary_index_at_angle(const UniaxialMedium& medium, double wavelength,
                                    double polar_angle) {
  if (!(polar_angle >= 0.0 && polar_angle <= std::numbers::pi / 2)) {
    throw DomainError(fmt::format("polar angle {} rad outside [0, pi/2]", polar_angle));
  }
  const double no = ordinary_index(medium, wavelength);
  const double ne = extraordinary_index(medium, wavelength);
  const double c = std::cos(polar_angle);
  const double s = std::sin(polar_angle);
  return 1.0 / std::sqrt(c * c / (no * no) + s * s / (ne * ne));
}

std::complex<double> gas_line_shape(const GasModel& gas, double wavelength) {
  const double detuning = 1.0 / gas.resonance_wavelength - 1.0 / wavelength;
  const double half_width =
      0.5 * gas.linewidth / (gas.resonance_wavelength * gas.resonance_wavelength);
  return half_width / std::complex<double>(detuning, -half_width);
}

std::complex<double> gas_complex_index(const GasModel& gas, double wavelength) {
  if (gas.concentration < 0.0) {
    throw DomainError(fmt::format("negative gas concentration {}", gas.concentration));
  }
  if (!(wavelength > 0.0)) throw DomainError("wavelength must be positive");
  if (gas.concentration == 0.0) return {gas.background_index, 0.0};
  const double kappa_peak = gas.peak_absorption * (gas.concentration / gas.reference_concentration) *
                            gas.resonance_wavelength / (4.0 * std::numbers::pi);
  return gas.background_index + kappa_peak * gas_line_shape(gas, wavelength);
}

GasModel co2_like_gas(double concentration, double peak_absorption) {
  GasModel g;
  g.concentration = concentration;
  g.peak_absorption = peak_absorption;
  return g;
}

GasModel calibrate_gas_phase(GasModel base, double target_phase, double idler_wavelength,
                             double gap_length) {
  if (!(base.concentration > 0.0)) throw DomainError("calibration needs a positive concentration");
  const double shape = gas_line_shape(base, idler_wavelength).real();
  if (shape == 0.0 || gap_length <= 0.0) {
    throw DomainError("calibration wavelength has no dispersive response");
  }
  const double index_shift = target_phase * idler_wavelength / (2.0 * std::numbers::pi * gap_length);
  const double kappa_peak = index_shift / shape;
  base.peak_absorption = kappa_peak * 4.0 * std::numbers::pi / base.resonance_wavelength /
                         (base.concentration / base.reference_concentration);
  return base;
}

GapMedium GapMedium::constant(double index, std::string label) {
  return GapMedium(Constant{index}, std::move(label));
}

GapMedium GapMedium::gas(const GasModel& model, std::string label) {
  return GapMedium(model, std::move(label));
}

GapMedium GapMedium::custom(std::function<std::complex<double>(double)> index, std::string label) {
  return GapMedium(
      Custom{std::make_shared<const std::function<std::complex<double>(double)>>(std::move(index))},
      std::move(label));
}

std::complex<double> GapMedium::index(double wavelength) const {
  struct Visitor {
    double wavelength;
    std::complex<double> operator()(const Constant& c) const { return {c.index, 0.0}; }
    std::complex<double> operator()(const GasModel& g) const { return gas_complex_index(g, wavelength); }
    std::complex<double> operator()(const Custom& c) const { return (*c.index)(wavelength); }
  };
  return std::visit(Visitor{wavelength}, model_);
}

}  // namespace superlattice
