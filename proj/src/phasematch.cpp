#include "superlattice/phasematch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include <boost/math/tools/roots.hpp>
#include <fmt/core.h>

#include "superlattice/errors.hpp"

namespace superlattice {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// sqrt(k² − q²) without losing digits when q ≪ k.
double longitudinal(double k, double q) { return std::sqrt((k - q) * (k + q)); }

std::complex<double> longitudinal(std::complex<double> k, double q) {
  return std::sqrt((k - q) * (k + q));
}

double signed_asin(double magnitude_sine, double sign_source) {
  return std::copysign(std::asin(magnitude_sine), sign_source);
}

}  // namespace

double idler_wavelength_for(double pump_wavelength, double signal_wavelength) {
  if (!(signal_wavelength > pump_wavelength)) {
    throw DomainError(fmt::format("signal wavelength {:.6g} nm must exceed the pump wavelength {:.6g} nm",
                                  signal_wavelength * 1e9, pump_wavelength * 1e9));
  }
  return 1.0 / (1.0 / pump_wavelength - 1.0 / signal_wavelength);
}

double pump_wavenumber(const PumpSpec& pump, const UniaxialMedium& crystal, double axis_angle) {
  return kTwoPi * extraordinary_index_at_angle(crystal, pump.wavelength, axis_angle) / pump.wavelength;
}

GapWavenumbers gap_wavenumbers(const GapMedium& medium, double pump_wavelength, double signal_wavelength,
                               double idler_wavelength) {
  GapWavenumbers k;
  k.pump = kTwoPi * medium.index(pump_wavelength).real() / pump_wavelength;
  k.signal = kTwoPi * medium.index(signal_wavelength).real() / signal_wavelength;
  k.idler = kTwoPi * medium.index(idler_wavelength) / idler_wavelength;
  return k;
}

GapMismatch gap_mismatch(const GapWavenumbers& k, double transverse_wavevector) {
  const double q = std::abs(transverse_wavevector);
  GapMismatch out;
  if (q > k.signal || (k.idler * k.idler).real() < q * q) {
    out.evanescent = true;
    return out;
  }
  const double signal_z = longitudinal(k.signal, q);
  const std::complex<double> idler_z = longitudinal(k.idler, q);
  out.value = {k.pump - signal_z - idler_z.real(), idler_z.imag()};
  return out;
}

SignalRow::SignalRow(const PumpSpec& pump, const UniaxialMedium& crystal, const GapMedium& detection,
                     double signal_wavelength)
    : pump_wavelength_(pump.wavelength),
      signal_wavelength_(signal_wavelength),
      idler_wavelength_(idler_wavelength_for(pump.wavelength, signal_wavelength)),
      k_signal_(kTwoPi * ordinary_index(crystal, signal_wavelength) / signal_wavelength),
      k_idler_(kTwoPi * ordinary_index(crystal, idler_wavelength_) / idler_wavelength_),
      gap_(gap_wavenumbers(detection, pump.wavelength, signal_wavelength, idler_wavelength_)) {}

double SignalRow::transverse_wavevector(double external_angle) const {
  return gap_.signal * std::sin(external_angle);
}

KinematicPoint SignalRow::at(double external_angle, double pump_k, PeriodLengths period) const {
  if (!(std::abs(external_angle) <= kMaxExternalAngle)) {
    throw DomainError(fmt::format("external signal angle {:.6g} deg exceeds 5 deg",
                                  external_angle * 180.0 / std::numbers::pi));
  }
  KinematicPoint p;
  p.signal_wavelength = signal_wavelength_;
  p.idler_wavelength = idler_wavelength_;
  p.external_signal_angle = external_angle;
  p.pump_k = pump_k;

  const double q = transverse_wavevector(external_angle);
  const double q_abs = std::abs(q);
  p.transverse_wavevector = q;

  const double sin_signal = q_abs / k_signal_;
  const double sin_idler = q_abs / k_idler_;
  if (sin_signal > 1.0 || sin_idler > 1.0) {
    p.evanescent = true;
    return p;
  }
  p.internal_signal_angle = signed_asin(sin_signal, external_angle);
  p.internal_idler_angle = -signed_asin(sin_idler, external_angle);
  p.signal_kz = longitudinal(k_signal_, q_abs);
  p.idler_kz = longitudinal(k_idler_, q_abs);
  p.delta_k_crystal = pump_k - p.signal_kz - p.idler_kz;

  const GapMismatch gap = gap_mismatch(gap_, q);
  if (gap.evanescent) {
    p.evanescent = true;
    return p;
  }
  p.external_idler_angle = -signed_asin(q_abs / gap_.idler.real(), external_angle);
  p.delta_k_gap = gap.value;
  p.phi = p.delta_k_crystal * period.crystal + p.delta_k_gap * period.gap;
  return p;
}

KinematicPoint kinematics(const PumpSpec& pump, const UniaxialMedium& crystal, const GapMedium& gap,
                          double signal_wavelength, double external_signal_angle, PeriodLengths period) {
  const SignalRow row(pump, crystal, gap, signal_wavelength);
  return row.at(external_signal_angle, pump_wavenumber(pump, crystal, pump.cut_angle), period);
}

PhaseMatchedPair collinear_signal_wavelength(const PumpSpec& pump, const UniaxialMedium& crystal,
                                             double search_min, double search_max) {
  // Keep both photons inside the dispersion band.
  const double lo = std::max({search_min, crystal.band_min * (1.0 + 1e-12),
                              1.0 / (1.0 / pump.wavelength - 1.0 / crystal.band_max) * (1.0 + 1e-12)});
  double hi = std::min(search_max, crystal.band_max);
  if (pump.wavelength < crystal.band_min) {
    hi = std::min(hi, 1.0 / (1.0 / pump.wavelength - 1.0 / crystal.band_min));
  }
  if (!(lo < hi)) {
    throw NoPhaseMatchingError("signal search band leaves the crystal dispersion band");
  }
  const double k_pump = pump_wavenumber(pump, crystal, pump.cut_angle);
  auto mismatch = [&](double signal) {
    const double idler = idler_wavelength_for(pump.wavelength, signal);
    return k_pump - kTwoPi * ordinary_index(crystal, signal) / signal -
           kTwoPi * ordinary_index(crystal, idler) / idler;
  };

  constexpr int kScan = 400;
  double a = lo;
  double fa = mismatch(a);
  for (int i = 1; i <= kScan; ++i) {
    const double b = lo + (hi - lo) * i / kScan;
    const double fb = mismatch(b);
    if (fa == 0.0) return {a, idler_wavelength_for(pump.wavelength, a), 0.0};
    if ((fa < 0.0) != (fb < 0.0)) {
      std::uintmax_t iterations = 200;
      const auto bracket = boost::math::tools::toms748_solve(
          mismatch, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(), iterations);
      const double fl = mismatch(bracket.first);
      const double fr = mismatch(bracket.second);
      const double root = std::abs(fl) <= std::abs(fr) ? bracket.first : bracket.second;
      return {root, idler_wavelength_for(pump.wavelength, root), std::min(std::abs(fl), std::abs(fr))};
    }
    a = b;
    fa = fb;
  }
  throw NoPhaseMatchingError(fmt::format(
      "no collinear phase matching between {:.6g} and {:.6g} nm at cut angle {:.6g} deg", lo * 1e9,
      hi * 1e9, pump.cut_angle * 180.0 / std::numbers::pi));
}

InteractionVolumeReport interaction_volume_check(const SuperlatticeConfig& config,
                                                 double max_external_angle) {
  double crystal = 0.0;
  for (const auto& c : config.crystals) crystal = std::max(crystal, c.length);
  double gap = 0.0;
  for (const auto& g : config.gaps) gap = std::max(gap, g.length);
  InteractionVolumeReport report;
  report.ratio = (2.0 * crystal + gap) * std::tan(std::abs(max_external_angle)) / config.pump.beam_diameter;
  report.pass = report.ratio <= report.threshold;
  return report;
}

}  // namespace superlattice
