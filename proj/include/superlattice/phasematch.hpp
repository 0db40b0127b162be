#pragma once

// Type-I (e -> o + o) SPDC kinematics. The pump propagates along z as an
// extraordinary wave at the cut angle to the optic axis; signal and idler are
// ordinary waves. Transverse wavevector q is conserved across the planar
// crystal/gap interfaces, so one external signal angle fixes every other angle.

#include <complex>
#include <numbers>

#include "superlattice/dispersion.hpp"
#include "superlattice/lattice.hpp"

namespace superlattice {

// Largest external signal angle accepted by the kinematics (5 deg).
inline constexpr double kMaxExternalAngle = 5.0 * std::numbers::pi / 180.0;

struct PeriodLengths {
  double crystal = 0.0;
  double gap = 0.0;
};

struct KinematicPoint {
  double signal_wavelength = 0.0;
  double idler_wavelength = 0.0;
  double external_signal_angle = 0.0;  // in the gap medium, signed
  double internal_signal_angle = 0.0;
  double internal_idler_angle = 0.0;   // opposite sign to the signal
  double external_idler_angle = 0.0;
  double transverse_wavevector = 0.0;  // q = k_s' sin(theta_ext), 1/m
  double pump_k = 0.0;                 // k_p inside the crystal at the nominal cut angle
  double signal_kz = 0.0;              // inside the crystal
  double idler_kz = 0.0;
  double delta_k_crystal = 0.0;        // k_p - k_s^z - k_i^z
  // Re: k_p' - k_s'^z - Re k_i'^z. Im: Im k_i'^z, the idler field attenuation
  // per unit length in the gap (>= 0 for a passive medium).
  std::complex<double> delta_k_gap;
  std::complex<double> phi;            // delta_k_crystal*l + delta_k_gap*l'
  bool evanescent = false;             // no propagating idler; excluded from patterns
};

KinematicPoint kinematics(const PumpSpec& pump, const UniaxialMedium& crystal, const GapMedium& gap,
                          double signal_wavelength, double external_signal_angle,
                          PeriodLengths period = {});

// Wavenumbers 2π n/λ of the three waves in a gap medium. Only the idler keeps
// the imaginary part of the index.
struct GapWavenumbers {
  double pump = 0.0;
  double signal = 0.0;
  std::complex<double> idler;
};

GapWavenumbers gap_wavenumbers(const GapMedium& medium, double pump_wavelength,
                               double signal_wavelength, double idler_wavelength);

struct GapMismatch {
  std::complex<double> value;
  bool evanescent = false;
};

GapMismatch gap_mismatch(const GapWavenumbers& k, double transverse_wavevector);

double idler_wavelength_for(double pump_wavelength, double signal_wavelength);

// Precomputes everything that depends only on the signal wavelength so that a
// row of angles can be evaluated cheaply.
class SignalRow {
 public:
  SignalRow(const PumpSpec& pump, const UniaxialMedium& crystal, const GapMedium& detection,
            double signal_wavelength);

  double signal_wavelength() const noexcept { return signal_wavelength_; }
  double idler_wavelength() const noexcept { return idler_wavelength_; }
  double crystal_signal_k() const noexcept { return k_signal_; }
  double crystal_idler_k() const noexcept { return k_idler_; }
  const GapWavenumbers& detection_gap() const noexcept { return gap_; }

  double transverse_wavevector(double external_angle) const;

  // Point evaluated against the detection medium; `pump_k` overrides the
  // nominal pump wavenumber in the crystal.
  KinematicPoint at(double external_angle, double pump_k, PeriodLengths period) const;

 private:
  double pump_wavelength_;
  double signal_wavelength_;
  double idler_wavelength_;
  double k_signal_;
  double k_idler_;
  GapWavenumbers gap_;
};

// Pump wavenumber inside the crystal for a given angle to the optic axis.
double pump_wavenumber(const PumpSpec& pump, const UniaxialMedium& crystal, double axis_angle);

struct PhaseMatchedPair {
  double signal_wavelength = 0.0;
  double idler_wavelength = 0.0;
  double residual = 0.0;  // delta_k at the root, 1/m
};

// Collinear (theta_s = 0) root of delta_k within [search_min, search_max],
// clipped so that the idler stays inside the crystal's dispersion band.
PhaseMatchedPair collinear_signal_wavelength(const PumpSpec& pump, const UniaxialMedium& crystal,
                                             double search_min = 560e-9, double search_max = 660e-9);

// r = (2l + l')·tan(theta_max)/d, with l and l' the longest crystal and gap.
struct InteractionVolumeReport {
  double ratio = 0.0;
  double threshold = 0.1;
  bool pass = true;
};

InteractionVolumeReport interaction_volume_check(const SuperlatticeConfig& config,
                                                 double max_external_angle);

}  // namespace superlattice
