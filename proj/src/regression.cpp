#include "superlattice/regression.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>

#include "csv.hpp"

namespace superlattice {
namespace {

namespace fs = std::filesystem;

std::optional<double> to_number(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<nlohmann::json> read_manifest(const fs::path& dir, RegressionReport& report) {
  const auto path = dir / "manifest.json";
  std::ifstream in(path);
  if (!in) {
    report.errors.push_back(fmt::format("missing manifest: {}", path.string()));
    return std::nullopt;
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    report.errors.push_back(fmt::format("unreadable manifest {}: {}", path.string(), e.what()));
    return std::nullopt;
  }
}

std::vector<std::string> csv_files(const nlohmann::json& manifest) {
  std::vector<std::string> files;
  for (const auto& task : manifest.value("tasks", nlohmann::json::array())) {
    for (const auto& f : task.value("files", nlohmann::json::array())) {
      const auto name = f.get<std::string>();
      if (name.size() > 4 && name.ends_with(".csv")) files.push_back(name);
    }
  }
  return files;
}

FileComparison compare_file(const std::string& name, const csv::Table& golden, const csv::Table& fresh,
                            double tolerance) {
  FileComparison out;
  out.file = name;
  auto diverge = [&](std::string message) {
    out.pass = false;
    if (out.first_divergence.empty()) out.first_divergence = std::move(message);
  };
  if (golden.header != fresh.header) {
    diverge(fmt::format("header differs: '{}' vs '{}'", fmt::join(golden.header, ","), fmt::join(fresh.header, ",")));
    return out;
  }
  if (golden.rows.size() != fresh.rows.size()) {
    diverge(fmt::format("row count differs: {} vs {}", golden.rows.size(), fresh.rows.size()));
    return out;
  }
  const auto theta_col = static_cast<std::size_t>(
      std::find(golden.header.begin(), golden.header.end(), "theta_s_deg") - golden.header.begin());

  for (std::size_t r = 0; r < golden.rows.size(); ++r) {
    const auto& a = golden.rows[r];
    const auto& b = fresh.rows[r];
    if (a.size() != b.size()) {
      diverge(fmt::format("row {}: {} cells vs {}", r + 2, a.size(), b.size()));
      ++out.divergent_cells;
      continue;
    }
    bool row_diverged = false;
    for (std::size_t c = 0; c < a.size(); ++c) {
      ++out.cells;
      const auto x = to_number(a[c]);
      const auto y = to_number(b[c]);
      bool same = false;
      double rel = 0.0;
      if (x && y) {
        const double scale = std::max(std::abs(*x), std::abs(*y));
        rel = scale == 0.0 ? 0.0 : std::abs(*x - *y) / scale;
        same = rel <= tolerance;
      } else {
        same = a[c] == b[c];
        rel = same ? 0.0 : 1.0;
      }
      out.max_relative_difference = std::max(out.max_relative_difference, rel);
      if (same) continue;
      ++out.divergent_cells;
      row_diverged = true;
      diverge(fmt::format("row {} column '{}': {} vs {} (relative {:.3g})", r + 2, golden.header[c], a[c], b[c], rel));
    }
    if (row_diverged && theta_col < a.size()) {
      if (const auto theta = to_number(a[theta_col])) {
        const double t = std::abs(*theta);
        out.min_divergent_angle_deg = out.min_divergent_angle_deg ? std::min(*out.min_divergent_angle_deg, t) : t;
      }
    }
  }
  return out;
}

}  // namespace

RegressionReport regression_check(const fs::path& golden_dir, const fs::path& fresh_dir, double tolerance) {
  RegressionReport report;
  const auto golden = read_manifest(golden_dir, report);
  const auto fresh = read_manifest(fresh_dir, report);
  if (!golden || !fresh) {
    report.pass = false;
    return report;
  }
  if (golden->value("config_hash", "") != fresh->value("config_hash", "")) {
    report.notes.push_back(fmt::format("config hash differs: {} vs {}", golden->value("config_hash", "?"),
                                       fresh->value("config_hash", "?")));
  }
  if (fresh->value("status", "") != "complete") {
    report.notes.push_back("fresh run did not complete: " + fresh->value("error", std::string()));
  }
  const auto files = csv_files(*golden);
  if (files.empty()) report.errors.push_back("golden manifest lists no CSV files");
  for (const auto& name : files) {
    const auto g = golden_dir / name;
    const auto f = fresh_dir / name;
    if (!fs::exists(g)) {
      report.errors.push_back(fmt::format("missing golden file {}", g.string()));
      continue;
    }
    if (!fs::exists(f)) {
      report.errors.push_back(fmt::format("missing counterpart {}", f.string()));
      continue;
    }
    report.files.push_back(compare_file(name, csv::read(g), csv::read(f), tolerance));
  }
  report.pass = report.errors.empty() &&
                std::all_of(report.files.begin(), report.files.end(), [](const auto& f) { return f.pass; });
  return report;
}

std::string format_report(const RegressionReport& report) {
  std::string out;
  for (const auto& e : report.errors) out += "ERROR " + e + "\n";
  for (const auto& f : report.files) {
    if (f.pass) {
      out += fmt::format("ok    {} ({} cells, max relative difference {:.3g})\n", f.file, f.cells,
                         f.max_relative_difference);
    } else {
      out += fmt::format("FAIL  {}: {} of {} cells differ; first: {}", f.file, f.divergent_cells, f.cells,
                         f.first_divergence);
      if (f.min_divergent_angle_deg) out += fmt::format("; smallest divergent |theta| {:.4f} deg", *f.min_divergent_angle_deg);
      out += "\n";
    }
  }
  for (const auto& n : report.notes) out += "note  " + n + "\n";
  out += report.pass ? "PASS\n" : "FAIL\n";
  return out;
}

}  // namespace superlattice
