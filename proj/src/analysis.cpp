#include "superlattice/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/core.h>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "superlattice/errors.hpp"

namespace superlattice {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kProminenceFloor = 0.01;
constexpr double kNeighbourFraction = 0.3;

// Vertex of the parabola through three samples; falls back to the middle
// sample when the points are collinear.
struct Vertex {
  double x;
  double y;
};

Vertex parabolic_vertex(const std::vector<double>& x, const std::vector<double>& y, std::size_t i) {
  const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
  const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double a = (d12 - d01) / (x2 - x0);
  if (a == 0.0 || !std::isfinite(a)) return {x1, y1};
  const double b = d01 - a * (x0 + x1);
  const double xv = std::clamp(-b / (2.0 * a), x0, x2);
  const double yv = y1 + (xv - x1) * (d01 + a * (xv - x0));
  return {xv, yv};
}

struct Extrema {
  std::vector<std::size_t> maxima;
  std::vector<std::size_t> minima;
};

Extrema find_extrema(const std::vector<double>& y) {
  Extrema e;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] > y[i - 1] && y[i] >= y[i + 1]) e.maxima.push_back(i);
    if (y[i] < y[i - 1] && y[i] <= y[i + 1]) e.minima.push_back(i);
  }
  return e;
}

// Principal maxima after the prominence filters, as sample indices.
std::vector<std::size_t> principal_maxima(const std::vector<double>& y, const Extrema& e) {
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double range = *hi - *lo;
  if (range <= 0.0) return {};

  struct Peak {
    std::size_t index;
    double prominence;
  };
  std::vector<Peak> peaks;
  for (std::size_t m : e.maxima) {
    // A fringe maximum sits between two local minima.
    const auto right = std::upper_bound(e.minima.begin(), e.minima.end(), m);
    if (right == e.minima.end() || right == e.minima.begin()) continue;
    const double prominence = y[m] - std::max(y[*(right - 1)], y[*right]);
    if (prominence > kProminenceFloor * range) peaks.push_back({m, prominence});
  }

  bool changed = true;
  while (changed && peaks.size() > 1) {
    changed = false;
    std::vector<bool> drop(peaks.size(), false);
    for (std::size_t i = 0; i < peaks.size(); ++i) {
      double neighbour = 0.0;
      if (i > 0) neighbour = std::max(neighbour, peaks[i - 1].prominence);
      if (i + 1 < peaks.size()) neighbour = std::max(neighbour, peaks[i + 1].prominence);
      if (peaks[i].prominence < kNeighbourFraction * neighbour) {
        drop[i] = true;
        changed = true;
      }
    }
    std::vector<Peak> kept;
    for (std::size_t i = 0; i < peaks.size(); ++i) {
      if (!drop[i]) kept.push_back(peaks[i]);
    }
    peaks = std::move(kept);
  }
  std::vector<std::size_t> out;
  out.reserve(peaks.size());
  for (const auto& p : peaks) out.push_back(p.index);
  return out;
}

bool in_window(double theta, double min_angle, double max_angle) {
  const double a = std::abs(theta);
  return a >= min_angle && a <= max_angle;
}

void check_section(const CrossSection& section) {
  if (section.angles.size() != section.intensity.size()) {
    throw DomainError("cross-section angle and intensity lengths differ");
  }
  if (section.angles.size() < 3) throw MetricsUnavailableError("cross-section needs at least 3 samples");
}

// Normalized N-crystal fringe factor, 1 at φ = 2πm.
double fringe_factor(double phi, int crystals) {
  const double n = crystals;
  return closed_form_intensity(0.0, phi, crystals, 1.0) / (n * n);
}

// Variable-projection model of one section. Nonlinear parameters are the
// fringe phase polynomial; the envelope polynomials are solved linearly.
class FringeModel {
 public:
  static constexpr int kEnvelopeTerms = 5;
  static constexpr int kBackgroundTerms = 3;
  static constexpr int kLinearTerms = kEnvelopeTerms + kBackgroundTerms;

  FringeModel(const CrossSection& section, int crystals, double max_angle) : crystals_(crystals) {
    for (std::size_t i = 0; i < section.angles.size(); ++i) {
      if (std::abs(section.angles[i]) <= max_angle) {
        const double s = section.angles[i] / max_angle;
        s2_.push_back(s * s);
        y_.push_back(section.intensity[i]);
      }
    }
    if (y_.size() < static_cast<std::size_t>(kLinearTerms + 3)) {
      throw FitError("too few samples inside the fit window");
    }
  }

  std::size_t size() const { return y_.size(); }

  Eigen::MatrixXd basis(double offset, double curvature, double quartic) const {
    Eigen::MatrixXd b(y_.size(), kLinearTerms);
    for (std::size_t i = 0; i < y_.size(); ++i) {
      const double t = s2_[i];
      const double k = fringe_factor(offset + curvature * t + quartic * t * t, crystals_);
      double power = 1.0;
      for (int j = 0; j < kEnvelopeTerms; ++j) {
        b(i, j) = k * power;
        if (j < kBackgroundTerms) b(i, kEnvelopeTerms + j) = power;
        power *= t;
      }
    }
    return b;
  }

  Eigen::VectorXd residual(double offset, double curvature, double quartic) const {
    const Eigen::MatrixXd b = basis(offset, curvature, quartic);
    const Eigen::Map<const Eigen::VectorXd> y(y_.data(), static_cast<Eigen::Index>(y_.size()));
    const Eigen::VectorXd coef = b.colPivHouseholderQr().solve(y);
    return y - b * coef;
  }

  double cost(double offset, double curvature, double quartic) const {
    return residual(offset, curvature, quartic).squaredNorm();
  }

  // 1σ of the offset from σ²(JᵀJ)⁻¹ over the offset and linear parameters.
  double offset_uncertainty(double offset, double curvature, double quartic) const {
    const Eigen::MatrixXd b = basis(offset, curvature, quartic);
    const Eigen::Map<const Eigen::VectorXd> y(y_.data(), static_cast<Eigen::Index>(y_.size()));
    const Eigen::VectorXd coef = b.colPivHouseholderQr().solve(y);
    const double h = 1e-6;
    const Eigen::VectorXd derivative =
        (basis(offset + h, curvature, quartic) * coef - basis(offset - h, curvature, quartic) * coef) / (2 * h);
    Eigen::MatrixXd j(y_.size(), kLinearTerms + 1);
    j.col(0) = derivative;
    j.rightCols(kLinearTerms) = b;
    const double dof = static_cast<double>(y_.size()) - static_cast<double>(j.cols());
    const double sigma2 = (y - b * coef).squaredNorm() / dof;
    const Eigen::MatrixXd covariance = (j.transpose() * j).completeOrthogonalDecomposition().pseudoInverse();
    return std::sqrt(std::max(0.0, sigma2 * covariance(0, 0)));
  }

  double rms(double offset, double curvature, double quartic) const {
    return std::sqrt(cost(offset, curvature, quartic) / static_cast<double>(y_.size()));
  }


 private:
  int crystals_;
  std::vector<double> s2_;
  std::vector<double> y_;
};

// Functor adaptor for Eigen's Levenberg-Marquardt over a subset of the
// nonlinear parameters.
struct ResidualFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const FringeModel* model;
  double curvature;
  double quartic;
  bool free_shape;

  int inputs() const { return free_shape ? 3 : 1; }
  int values() const { return static_cast<int>(model->size()); }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    f = free_shape ? model->residual(x(0), x(1), x(2)) : model->residual(x(0), curvature, quartic);
    return 0;
  }
};

Eigen::VectorXd minimize(const ResidualFunctor& functor, Eigen::VectorXd x) {
  Eigen::NumericalDiff<ResidualFunctor> numeric(functor);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<ResidualFunctor>, double> lm(numeric);
  lm.parameters.maxfev = 2000;
  const auto status = lm.minimize(x);
  using namespace Eigen::LevenbergMarquardtSpace;
  if (status == ImproperInputParameters || status == TooManyFunctionEvaluation || !x.allFinite()) {
    throw FitError(fmt::format("fringe fit did not converge (status {})", static_cast<int>(status)));
  }
  return x;
}

double best_offset_on_grid(const FringeModel& model, double curvature, double quartic) {
  constexpr int kSteps = 72;
  double best = 0.0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kSteps; ++i) {
    const double offset = -kPi + 2 * kPi * i / kSteps;
    const double c = model.cost(offset, curvature, quartic);
    if (c < best_cost) {
      best_cost = c;
      best = offset;
    }
  }
  return best;
}

double wrap_phase(double x) {
  double r = std::remainder(x, 2 * kPi);
  if (r <= -kPi) r += 2 * kPi;
  return r;
}

}  // namespace

CrossSection cross_section(const InterferencePattern& pattern, double center_wavelength, double bandwidth) {
  const auto& axis = pattern.signal_wavelengths;
  if (axis.empty() || pattern.columns() == 0) throw DomainError("empty pattern");
  if (!(bandwidth >= 0.0)) throw DomainError("bandwidth must be non-negative");
  const double step = axis.size() > 1 ? (axis.back() - axis.front()) / static_cast<double>(axis.size() - 1) : 0.0;
  if (center_wavelength < axis.front() - 0.5 * step || center_wavelength > axis.back() + 0.5 * step) {
    throw DomainError(fmt::format("center {:.6g} nm lies outside the pattern's wavelength axis",
                                  center_wavelength * 1e9));
  }

  std::vector<std::size_t> rows;
  if (bandwidth == 0.0) {
    std::size_t nearest = 0;
    for (std::size_t r = 1; r < axis.size(); ++r) {
      if (std::abs(axis[r] - center_wavelength) < std::abs(axis[nearest] - center_wavelength)) nearest = r;
    }
    rows.push_back(nearest);
  } else {
    const double half = 0.5 * bandwidth * (1.0 + 1e-9);
    for (std::size_t r = 0; r < axis.size(); ++r) {
      if (std::abs(axis[r] - center_wavelength) <= half) rows.push_back(r);
    }
  }
  if (rows.empty()) {
    throw DomainError(fmt::format("no rows within {:.6g} nm of {:.6g} nm", 0.5 * bandwidth * 1e9,
                                  center_wavelength * 1e9));
  }

  CrossSection section;
  section.center_wavelength = center_wavelength;
  section.averaging_bandwidth = bandwidth;
  section.angles = pattern.external_angles;
  section.intensity.assign(pattern.columns(), 0.0);
  for (std::size_t r : rows) {
    const auto row = pattern.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) section.intensity[c] += row[c];
  }
  const double peak = *std::max_element(section.intensity.begin(), section.intensity.end());
  if (peak > 0.0) {
    for (auto& v : section.intensity) v /= peak;
  }
  return section;
}

double visibility(const CrossSection& section, double min_angle, double max_angle) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < section.angles.size(); ++i) {
    if (in_window(section.angles[i], min_angle, max_angle)) {
      lo = std::min(lo, section.intensity[i]);
      hi = std::max(hi, section.intensity[i]);
    }
  }
  if (!std::isfinite(lo)) throw MetricsUnavailableError("no samples inside the visibility window");
  return hi + lo > 0.0 ? (hi - lo) / (hi + lo) : 0.0;
}

FringeMetrics fringe_metrics(const CrossSection& section, const AnalysisWindow& window) {
  check_section(section);
  const auto& x = section.angles;
  const auto& y = section.intensity;
  const Extrema extrema = find_extrema(y);
  const auto peaks = principal_maxima(y, extrema);
  if (peaks.empty() || extrema.minima.empty()) throw MetricsUnavailableError("section has no interior extrema");

  std::vector<double> minimum_positions;
  minimum_positions.reserve(extrema.minima.size());
  for (std::size_t m : extrema.minima) minimum_positions.push_back(parabolic_vertex(x, y, m).x);

  FringeMetrics metrics;
  double width_sum = 0.0;
  for (std::size_t p : peaks) {
    const double position = parabolic_vertex(x, y, p).x;
    const auto right = std::upper_bound(extrema.minima.begin(), extrema.minima.end(), p);
    double width = std::numeric_limits<double>::infinity();
    if (right != extrema.minima.end()) {
      width = std::min(width, std::abs(minimum_positions[right - extrema.minima.begin()] - position));
    }
    if (right != extrema.minima.begin()) {
      width = std::min(width, std::abs(minimum_positions[right - extrema.minima.begin() - 1] - position));
    }
    metrics.peak_angles.push_back(position);
    metrics.widths.push_back(width);
    if (in_window(position, window.min_angle, window.max_angle)) {
      width_sum += width;
      ++metrics.window_peaks;
    }
  }
  if (metrics.window_peaks == 0) {
    throw MetricsUnavailableError("no fringe maxima inside the analysis window");
  }
  metrics.mean_width = width_sum / static_cast<double>(metrics.window_peaks);
  metrics.visibility = visibility(section, window.min_angle, window.max_angle);
  return metrics;
}

double width_ratio(const FringeMetrics& reference, const FringeMetrics& other) {
  if (!(other.mean_width > 0.0)) throw MetricsUnavailableError("mean width is zero");
  return reference.mean_width / other.mean_width;
}

std::vector<WidthRatio> width_ratio_curve(const std::vector<SuperlatticeConfig>& configs, const GridAxes& grid,
                                          double center_wavelength, double bandwidth,
                                          const AnalysisWindow& window, const ExecutionOptions& exec) {
  std::vector<WidthRatio> curve;
  FringeMetrics reference;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto metrics =
        fringe_metrics(cross_section(pattern(configs[i], grid, exec), center_wavelength, bandwidth), window);
    if (i == 0) reference = metrics;
    curve.push_back({configs[i].enabled_count(), metrics.mean_width, width_ratio(reference, metrics)});
  }
  return curve;
}

PhaseFit fit_fringe_phase(const CrossSection& section, int crystals, const AnalysisWindow& window) {
  check_section(section);
  if (crystals < 2) throw FitError("fringe phase needs at least two crystals");
  const FringeModel model(section, crystals, window.max_angle);

  // Initial curvature from the spacing of principal maxima in s².
  const Extrema extrema = find_extrema(section.intensity);
  std::vector<double> peak_s2;
  for (std::size_t p : principal_maxima(section.intensity, extrema)) {
    const double s = parabolic_vertex(section.angles, section.intensity, p).x / window.max_angle;
    if (s > 0.0 && s <= 1.0) peak_s2.push_back(s * s);
  }
  if (peak_s2.size() < 2) throw FitError("too few fringes to seed the phase fit");
  std::vector<double> spacing;
  for (std::size_t i = 1; i < peak_s2.size(); ++i) spacing.push_back(peak_s2[i] - peak_s2[i - 1]);
  std::nth_element(spacing.begin(), spacing.begin() + spacing.size() / 2, spacing.end());
  const double curvature0 = 2 * kPi / spacing[spacing.size() / 2];

  const double offset0 = best_offset_on_grid(model, curvature0, 0.0);
  Eigen::VectorXd x(3);
  x << offset0, curvature0, 0.0;
  x = minimize({&model, 0.0, 0.0, true}, x);

  PhaseFit fit;
  fit.offset = wrap_phase(x(0));
  fit.curvature = x(1);
  fit.quartic = x(2);
  fit.uncertainty = model.offset_uncertainty(x(0), x(1), x(2));
  fit.rms_residual = model.rms(x(0), x(1), x(2));
  return fit;
}

PhaseShift phase_shift(const CrossSection& reference, const CrossSection& sample, int crystals,
                       const AnalysisWindow& window) {
  if (reference.angles != sample.angles) throw DomainError("phase_shift needs identical angle axes");
  const PhaseFit shape = fit_fringe_phase(reference, crystals, window);

  struct Offset {
    double value;
    double uncertainty;
  };
  auto refit = [&](const CrossSection& section, double start) {
    const FringeModel model(section, crystals, window.max_angle);
    // Seed from the grid when the reference offset is a poor start.
    const double grid = best_offset_on_grid(model, shape.curvature, shape.quartic);
    if (model.cost(grid, shape.curvature, shape.quartic) < model.cost(start, shape.curvature, shape.quartic)) {
      start = grid;
    }
    Eigen::VectorXd x(1);
    x << start;
    x = minimize({&model, shape.curvature, shape.quartic, false}, x);
    return Offset{x(0), model.offset_uncertainty(x(0), shape.curvature, shape.quartic)};
  };
  const Offset a = refit(reference, shape.offset);
  const Offset b = refit(sample, shape.offset);
  return {wrap_phase(a.value - b.value), std::hypot(a.uncertainty, b.uncertainty)};
}

double slope_gain(const CrossSection& a, const CrossSection& b, const AnalysisWindow& window) {
  auto max_slope = [&](const CrossSection& s) {
    check_section(s);
    double best = 0.0;
    for (std::size_t i = 1; i + 1 < s.angles.size(); ++i) {
      if (!in_window(s.angles[i], window.min_angle, window.max_angle)) continue;
      const double slope = (s.intensity[i + 1] - s.intensity[i - 1]) / (s.angles[i + 1] - s.angles[i - 1]);
      best = std::max(best, std::abs(slope));
    }
    return best;
  };
  const double slope_a = max_slope(a);
  if (!(slope_a > 0.0)) throw MetricsUnavailableError("reference section is flat inside the window");
  return max_slope(b) / slope_a;
}

}  // namespace superlattice
