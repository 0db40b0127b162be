#include "plot.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace superlattice::plot {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 50.0;
constexpr std::size_t kMaxCells = 200;

constexpr std::array<std::array<double, 3>, 5> kColormap{{
    {0.267, 0.005, 0.329},
    {0.229, 0.322, 0.546},
    {0.128, 0.567, 0.551},
    {0.369, 0.789, 0.383},
    {0.993, 0.906, 0.144},
}};

std::string color(double v) {
  v = std::clamp(v, 0.0, 1.0) * (kColormap.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(v), kColormap.size() - 2);
  const double f = v - static_cast<double>(i);
  auto channel = [&](int c) {
    return static_cast<int>(std::lround(255.0 * ((1 - f) * kColormap[i][c] + f * kColormap[i + 1][c])));
  };
  return fmt::format("#{:02x}{:02x}{:02x}", channel(0), channel(1), channel(2));
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string frame(const std::string& title, const std::string& x_label, const std::string& y_label, double x0,
                  double x1, double y0, double y1) {
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight, kWidth, kHeight);
  s += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", kWidth / 2,
                   escape(title));
  s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft, kTop,
                   pw, ph);
  for (int i = 0; i <= 4; ++i) {
    const double fx = kLeft + pw * i / 4.0;
    const double fy = kTop + ph * (1.0 - i / 4.0);
    s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.4g}</text>\n", fx, kTop + ph + 16,
                     x0 + (x1 - x0) * i / 4.0);
    s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.5g}</text>\n", kLeft - 6, fy + 4,
                     y0 + (y1 - y0) * i / 4.0);
  }
  s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2, kHeight - 10,
                   escape(x_label));
  s += fmt::format("<text x=\"14\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>\n",
                   kTop + ph / 2, kTop + ph / 2, escape(y_label));
  return s;
}

}  // namespace

std::string heatmap_svg(const InterferencePattern& p, const std::string& title) {
  constexpr double kToDeg = 180.0 / std::numbers::pi;
  const double x0 = p.external_angles.front() * kToDeg;
  const double x1 = p.external_angles.back() * kToDeg;
  const double y0 = p.signal_wavelengths.front() * 1e9;
  const double y1 = p.signal_wavelengths.back() * 1e9;
  std::string s = frame(title, "external signal angle (deg)", "signal wavelength (nm)", x0, x1, y0, y1);
  const std::size_t nx = std::min(kMaxCells, p.columns());
  const std::size_t ny = std::min(kMaxCells, p.rows());
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  const double cw = pw / static_cast<double>(nx);
  const double ch = ph / static_cast<double>(ny);
  s += "<g shape-rendering=\"crispEdges\">\n";
  for (std::size_t j = 0; j < ny; ++j) {
    const std::size_t r = ny == 1 ? 0 : j * (p.rows() - 1) / (ny - 1);
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t c = nx == 1 ? 0 : i * (p.columns() - 1) / (nx - 1);
      s += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                       kLeft + cw * i, kTop + ph - ch * (j + 1), cw + 0.05, ch + 0.05, color(p.at(r, c)));
    }
  }
  s += "</g>\n</svg>\n";
  return s;
}

std::string line_svg(const std::vector<double>& x, const std::vector<Series>& series, const std::string& x_label,
                     const std::string& y_label, const std::string& title) {
  static constexpr std::array<const char*, 4> kColors{"#000000", "#e66101", "#5e3c99", "#1b9e77"};
  double lo = 0.0;
  double hi = 0.0;
  bool first = true;
  for (const auto& ser : series) {
    for (double v : ser.y) {
      if (first) {
        lo = hi = v;
        first = false;
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi <= lo) hi = lo + 1.0;
  const double x0 = x.front();
  const double x1 = x.back() > x0 ? x.back() : x0 + 1.0;
  std::string s = frame(title, x_label, y_label, x0, x1, lo, hi);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  for (std::size_t k = 0; k < series.size(); ++k) {
    std::string points;
    for (std::size_t i = 0; i < x.size() && i < series[k].y.size(); ++i) {
      points += fmt::format("{:.2f},{:.2f} ", kLeft + pw * (x[i] - x0) / (x1 - x0),
                            kTop + ph * (1.0 - (series[k].y[i] - lo) / (hi - lo)));
    }
    const char* c = kColors[k % kColors.size()];
    s += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" points=\"{}\"/>\n", c, points);
    s += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", kLeft + 8, kTop + 16 + 14 * k, c,
                     escape(series[k].label));
  }
  s += "</svg>\n";
  return s;
}

}  // namespace superlattice::plot
