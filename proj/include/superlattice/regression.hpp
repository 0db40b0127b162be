#pragma once

// Golden-file comparison of two run directories.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace superlattice {

inline constexpr double kDefaultRegressionTolerance = 1e-9;

struct FileComparison {
  std::string file;
  bool pass = true;
  std::size_t cells = 0;
  std::size_t divergent_cells = 0;
  double max_relative_difference = 0.0;
  std::string first_divergence;  // empty when the file matches
  // Smallest |θ| among divergent rows, for files with a theta_s_deg column.
  std::optional<double> min_divergent_angle_deg;
};

struct RegressionReport {
  bool pass = true;
  std::vector<FileComparison> files;
  std::vector<std::string> errors;  // missing manifests or counterpart files
  std::vector<std::string> notes;
};

// Compares every CSV listed in the golden manifest against the file of the
// same name in `fresh_dir`, numeric cells at |a − b| ≤ tol·max(|a|, |b|) and
// text cells exactly.
RegressionReport regression_check(const std::filesystem::path& golden_dir, const std::filesystem::path& fresh_dir,
                                  double tolerance = kDefaultRegressionTolerance);

std::string format_report(const RegressionReport& report);

}  // namespace superlattice
