#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace test {

constexpr double deg(double degrees) { return degrees * std::numbers::pi / 180.0; }
constexpr double nm(double nanometers) { return nanometers * 1e-9; }
constexpr double mm(double millimeters) { return millimeters * 1e-3; }
constexpr double um(double micrometers) { return micrometers * 1e-6; }

inline double relative_error(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace test
