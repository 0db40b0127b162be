#include "superlattice/interference.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <fmt/core.h>

#include "superlattice/errors.hpp"

namespace superlattice {
namespace {

constexpr double kSeriesThreshold = 1e-8;

// Lattice-level constants: pump wavenumber per crystal and the distinct gap
// media, so that each node needs one mismatch evaluation per medium.
class LatticeEvaluator {
 public:
  explicit LatticeEvaluator(const SuperlatticeConfig& config) : config_(config) {
    validate(config);
    if (config.enabled_count() == 0) throw ValidationError("all crystals are disabled", "crystals");
    pump_k_.reserve(config.crystals.size());
    for (const auto& c : config.crystals) {
      pump_k_.push_back(pump_wavenumber(config.pump, config.crystal_medium,
                                        config.pump.cut_angle + c.cut_angle_offset));
    }
    for (const auto& g : config.gaps) gap_medium_.push_back(medium_slot(g.medium));
    // A removed crystal is filled by the medium of the gap in front of it
    // (behind it for the first crystal).
    for (std::size_t i = 0; i < config.crystals.size(); ++i) {
      if (config.gaps.empty()) {
        slot_medium_.push_back(medium_slot(GapMedium{}));
      } else {
        slot_medium_.push_back(gap_medium_[i == 0 ? 0 : i - 1]);
      }
    }
    lossless_ = std::all_of(media_.begin(), media_.end(), [](const GapMedium& m) {
      return std::holds_alternative<GapMedium::Constant>(m.model());
    });
    f_.reserve(config.crystals.size());
    im_.reserve(config.crystals.size());
  }

  const SuperlatticeConfig& config() const { return config_; }
  std::size_t media_count() const { return media_.size(); }
  const GapMedium& medium(std::size_t i) const { return media_[i]; }

  // Gap wavenumbers of every distinct medium at one signal wavelength.
  void row_wavenumbers(double signal, double idler, std::vector<GapWavenumbers>& out) const {
    out.clear();
    for (const auto& m : media_) out.push_back(gap_wavenumbers(m, config_.pump.wavelength, signal, idler));
  }

  // Mismatch per distinct medium at transverse wavevector q; false if any is evanescent.
  static bool mismatches(const std::vector<GapWavenumbers>& k, double q,
                         std::vector<std::complex<double>>& out) {
    out.clear();
    for (const auto& w : k) {
      const GapMismatch m = gap_mismatch(w, q);
      if (m.evanescent) return false;
      out.push_back(m.value);
    }
    return true;
  }

  // Walks the lattice, calling emit(index, Δk_n, l_n, ψ_n) for each enabled crystal.
  template <typename Emit>
  void walk(double signal_kz, double idler_kz, const std::vector<std::complex<double>>& gap_dk,
            Emit&& emit) const {
    std::complex<double> psi = 0.0;
    const auto& crystals = config_.crystals;
    for (std::size_t i = 0; i < crystals.size(); ++i) {
      const double dk = pump_k_[i] - signal_kz - idler_kz;
      if (crystals[i].enabled) {
        emit(i, dk, crystals[i].length, psi);
        psi += dk * crystals[i].length;
      } else {
        psi += gap_dk[slot_medium_[i]] * crystals[i].length;
      }
      if (i < config_.gaps.size()) psi += gap_dk[gap_medium_[i]] * config_.gaps[i].length;
    }
  }

  double intensity(double signal_kz, double idler_kz, const std::vector<std::complex<double>>& gap_dk) const {
    f_.clear();
    im_.clear();
    walk(signal_kz, idler_kz, gap_dk, [&](std::size_t, double dk, double length, std::complex<double> psi) {
      f_.push_back(single_crystal_amplitude(dk, length) * std::polar(1.0, -psi.real()));
      im_.push_back(psi.imag());
    });
    const bool coherent =
        lossless_ || std::all_of(im_.begin(), im_.end(), [&](double v) { return v == im_.front(); });
    if (coherent) {
      std::complex<double> sum = 0.0;
      for (const auto& f : f_) sum += f;
      return std::norm(sum);
    }
    double total = 0.0;
    for (std::size_t n = 0; n < f_.size(); ++n) {
      total += std::norm(f_[n]);
      for (std::size_t m = n + 1; m < f_.size(); ++m) {
        total += 2.0 * (f_[n] * std::conj(f_[m])).real() * std::exp(-std::abs(im_[n] - im_[m]));
      }
    }
    return std::max(total, 0.0);
  }

 private:
  std::size_t medium_slot(const GapMedium& medium) {
    const auto it = std::find(media_.begin(), media_.end(), medium);
    if (it != media_.end()) return static_cast<std::size_t>(it - media_.begin());
    media_.push_back(medium);
    return media_.size() - 1;
  }

  const SuperlatticeConfig& config_;
  std::vector<double> pump_k_;
  std::vector<GapMedium> media_;
  std::vector<std::size_t> gap_medium_;
  std::vector<std::size_t> slot_medium_;
  bool lossless_ = true;
  mutable std::vector<std::complex<double>> f_;
  mutable std::vector<double> im_;
};

std::vector<std::complex<double>> point_mismatches(const LatticeEvaluator& lattice,
                                                   const KinematicPoint& point) {
  std::vector<GapWavenumbers> k;
  lattice.row_wavenumbers(point.signal_wavelength, point.idler_wavelength, k);
  std::vector<std::complex<double>> dk;
  if (!LatticeEvaluator::mismatches(k, point.transverse_wavevector, dk)) {
    throw DomainError("idler is evanescent in a gap medium at this point");
  }
  return dk;
}

bool strictly_increasing(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), [](double a, double b) { return !(a < b); }) == v.end();
}

}  // namespace

GridAxes GridAxes::uniform(double wavelength_min, double wavelength_max, std::size_t wavelength_points,
                           double max_angle, std::size_t angle_points) {
  GridAxes g;
  auto linspace = [](double a, double b, std::size_t n, std::vector<double>& out) {
    out.resize(n);
    if (n == 1) {
      out[0] = 0.5 * (a + b);
      return;
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    out.back() = b;
  };
  linspace(wavelength_min, wavelength_max, wavelength_points, g.signal_wavelengths);
  linspace(-max_angle, max_angle, angle_points, g.external_angles);
  // Exact mirror symmetry of the angle axis.
  for (std::size_t i = 0; i < angle_points / 2; ++i) {
    g.external_angles[angle_points - 1 - i] = -g.external_angles[i];
  }
  if (angle_points % 2 == 1) g.external_angles[angle_points / 2] = 0.0;
  return g;
}

void validate(const GridAxes& grid) {
  if (grid.signal_wavelengths.empty()) throw ValidationError("empty wavelength axis", "grid");
  if (grid.external_angles.empty()) throw ValidationError("empty angle axis", "grid");
  if (!strictly_increasing(grid.signal_wavelengths)) {
    throw ValidationError("wavelength axis must be strictly increasing", "grid");
  }
  if (!strictly_increasing(grid.external_angles)) {
    throw ValidationError("angle axis must be strictly increasing", "grid");
  }
  if (std::abs(grid.external_angles.front()) > kMaxExternalAngle ||
      std::abs(grid.external_angles.back()) > kMaxExternalAngle) {
    throw ValidationError("angles must stay within 5 deg", "grid");
  }
}

GridAxes default_grid(const SuperlatticeConfig& config) {
  const double center = collinear_signal_wavelength(config.pump, config.crystal_medium).signal_wavelength;
  return GridAxes::uniform(center - kDefaultHalfBand, center + kDefaultHalfBand, kDefaultWavelengthPoints,
                           kDefaultMaxAngle, kDefaultAnglePoints);
}

std::complex<double> single_crystal_amplitude(double delta_k_crystal, double length) {
  const double x = delta_k_crystal * length;
  if (std::abs(x) < kSeriesThreshold) return {1.0, -0.5 * x};
  const double half = 0.5 * x;
  const double envelope = std::sin(half) / half;
  return std::polar(envelope, -half);
}

std::vector<std::complex<double>> accumulated_phases(const SuperlatticeConfig& config,
                                                     const KinematicPoint& point) {
  const LatticeEvaluator lattice(config);
  const auto gap_dk = point_mismatches(lattice, point);
  std::vector<std::complex<double>> phases;
  lattice.walk(point.signal_kz, point.idler_kz, gap_dk,
               [&](std::size_t, double, double, std::complex<double> psi) { phases.push_back(psi); });
  return phases;
}

double node_intensity(const SuperlatticeConfig& config, const KinematicPoint& point) {
  if (point.evanescent) return 0.0;
  const LatticeEvaluator lattice(config);
  return lattice.intensity(point.signal_kz, point.idler_kz, point_mismatches(lattice, point));
}

void parallel_rows(std::size_t rows, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, rows));
  if (threads <= 1) {
    for (std::size_t r = 0; r < rows; ++r) fn(r);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        try {
          for (std::size_t r = t; r < rows; r += threads) fn(r);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<double> raw_pattern(const SuperlatticeConfig& config, const GridAxes& grid,
                                const ExecutionOptions& exec, std::vector<std::uint8_t>* evanescent) {
  validate(grid);
  validate(config);
  const std::size_t rows = grid.signal_wavelengths.size();
  const std::size_t cols = grid.external_angles.size();
  std::vector<double> raw(rows * cols, 0.0);
  if (evanescent) evanescent->assign(rows * cols, 0);
  const GapMedium& detection = detection_medium(config);

  parallel_rows(rows, exec.threads, [&](std::size_t r) {
    const LatticeEvaluator lattice(config);
    const SignalRow row(config.pump, config.crystal_medium, detection, grid.signal_wavelengths[r]);
    std::vector<GapWavenumbers> k;
    lattice.row_wavenumbers(row.signal_wavelength(), row.idler_wavelength(), k);
    std::vector<std::complex<double>> gap_dk;
    const double ks = row.crystal_signal_k();
    const double ki = row.crystal_idler_k();
    for (std::size_t c = 0; c < cols; ++c) {
      const double q = std::abs(row.transverse_wavevector(grid.external_angles[c]));
      const bool propagating = q <= ki && q <= ks && LatticeEvaluator::mismatches(k, q, gap_dk);
      if (!propagating) {
        if (evanescent) (*evanescent)[r * cols + c] = 1;
        continue;
      }
      const double signal_kz = std::sqrt((ks - q) * (ks + q));
      const double idler_kz = std::sqrt((ki - q) * (ki + q));
      raw[r * cols + c] = lattice.intensity(signal_kz, idler_kz, gap_dk);
    }
  });
  return raw;
}

InterferencePattern normalized_pattern(const GridAxes& grid, std::vector<double> raw,
                                       std::vector<std::uint8_t> evanescent) {
  InterferencePattern p;
  p.signal_wavelengths = grid.signal_wavelengths;
  p.external_angles = grid.external_angles;
  p.normalization = raw.empty() ? 0.0 : *std::max_element(raw.begin(), raw.end());
  if (p.normalization > 0.0) {
    for (auto& v : raw) v /= p.normalization;
  }
  p.intensity = std::move(raw);
  p.evanescent = evanescent.empty() ? std::vector<std::uint8_t>(p.intensity.size(), 0) : std::move(evanescent);
  return p;
}

InterferencePattern pattern(const SuperlatticeConfig& config, const GridAxes& grid,
                            const ExecutionOptions& exec) {
  std::vector<std::uint8_t> evanescent;
  auto raw = raw_pattern(config, grid, exec, &evanescent);
  return normalized_pattern(grid, std::move(raw), std::move(evanescent));
}

double closed_form_intensity(double delta_k_crystal, double phi, int n_crystals, double length) {
  if (n_crystals < 1) throw DomainError("closed form needs at least one crystal");
  using ld = long double;
  const ld half_x = static_cast<ld>(delta_k_crystal) * static_cast<ld>(length) / 2;
  const ld envelope = std::abs(half_x) < static_cast<ld>(kSeriesThreshold) ? 1.0L - half_x * half_x / 6
                                                                            : std::sin(half_x) / half_x;
  const ld half_phi = static_cast<ld>(phi) / 2;
  const ld n = static_cast<ld>(n_crystals);
  const ld denominator = std::sin(half_phi);
  const ld ratio = std::abs(denominator) < 1e-9L ? n * std::cos(n * half_phi) / std::cos(half_phi)
                                                 : std::sin(n * half_phi) / denominator;
  const ld amplitude = envelope * ratio;
  return static_cast<double>(amplitude * amplitude);
}

double defect_closed_form(const KinematicPoint& point, double crystal_length, double gap_length) {
  const double dk = point.delta_k_crystal;
  const double dk_gap = point.delta_k_gap.real();
  const double phi = dk * crystal_length + dk_gap * gap_length;
  const double psi4 = 3.0 * phi - (dk - dk_gap) * crystal_length;
  const double half_x = 0.5 * dk * crystal_length;
  const double sinc = std::abs(half_x) < kSeriesThreshold ? 1.0 : std::sin(half_x) / half_x;
  const double envelope = sinc * sinc;
  const double a = std::cos(0.5 * phi);
  const double b = std::cos(0.5 * psi4);
  return 16.0 * envelope * a * a * b * b;
}

}  // namespace superlattice
