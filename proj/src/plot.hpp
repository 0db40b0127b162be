#pragma once

// Minimal SVG figures: a heatmap of a pattern and a line plot of sections.

#include <string>
#include <vector>

#include "superlattice/interference.hpp"

namespace superlattice::plot {

struct Series {
  std::string label;
  std::vector<double> y;
};

std::string heatmap_svg(const InterferencePattern& pattern, const std::string& title);

std::string line_svg(const std::vector<double>& x, const std::vector<Series>& series, const std::string& x_label,
                     const std::string& y_label, const std::string& title);

}  // namespace superlattice::plot
