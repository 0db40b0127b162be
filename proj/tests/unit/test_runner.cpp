#include <doctest.h>

#include <fmt/format.h>
#include <unistd.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "superlattice/regression.hpp"
#include "superlattice/runner.hpp"
#include "test_helpers.hpp"

using namespace superlattice;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = SUPERLATTICE_SOURCE_DIR;

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("superlattice_test_runner_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  return dir;
}

Scenario small(const std::string& file) {
  auto s = parse_scenario(kSource / "scenarios" / file);
  s.grid.wavelength_points = 21;
  s.grid.angle_points = 241;
  return s;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

nlohmann::json manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  return nlohmann::json::parse(in);
}

std::string csv_number_for_test(double v) { return fmt::format("{:.15e}", v); }

void replace_cell(const fs::path& path, std::size_t row, std::size_t column, const std::string& value) {
  auto rows = read_csv(path);
  rows[row][column] = value;
  std::ofstream out(path);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << r[c];
    out << "\n";
  }
}

}  // namespace

TEST_CASE("fig2 run writes patterns, sections and a manifest") {
  const auto dir = fresh_dir("fig2");
  const auto result = run(small("fig2.toml"), {dir, {2}, true});
  REQUIRE(result.exit_code == kExitSuccess);
  for (const char* f : {"pattern_N2.csv", "pattern_N5.csv", "cross_section_N2.csv", "cross_section_N5.csv",
                        "pattern_N5.svg", "cross_section_N3.svg", "manifest.json"}) {
    CAPTURE(f);
    CHECK(fs::exists(dir / f));
  }

  const auto pattern = read_csv(dir / "pattern_N5.csv");
  REQUIRE(pattern.size() == 1 + 21 * 241);
  CHECK(pattern[0] == std::vector<std::string>{"lambda_s_nm", "theta_s_deg", "intensity"});
  // Long format: wavelength-major, angle strictly increasing within a block,
  // wavelength strictly increasing across blocks.
  for (std::size_t r = 2; r < pattern.size(); ++r) {
    const double lambda_prev = std::stod(pattern[r - 1][0]);
    const double lambda = std::stod(pattern[r][0]);
    if ((r - 1) % 241 == 0) {
      CHECK(lambda > lambda_prev);
    } else {
      CHECK(lambda == lambda_prev);
      CHECK(std::stod(pattern[r][1]) > std::stod(pattern[r - 1][1]));
    }
  }
  // Scientific notation with at least 12 significant digits.
  for (const auto& cell : pattern[100]) {
    const auto e = cell.find('e');
    REQUIRE(e != std::string::npos);
    std::size_t digits = 0;
    for (std::size_t i = 0; i < e; ++i) digits += std::isdigit(static_cast<unsigned char>(cell[i])) ? 1 : 0;
    CHECK(digits >= 12);
  }

  const auto section = read_csv(dir / "cross_section_N2.csv");
  CHECK(section[0] == std::vector<std::string>{"theta_s_deg", "intensity"});
  CHECK(section.size() == 242);

  const auto m = manifest(dir);
  CHECK(m["status"] == "complete");
  CHECK(m["config_hash"] == format_hash(config_hash(small("fig2.toml"))));
  CHECK(m["version"] == SUPERLATTICE_VERSION);
  CHECK(m["tasks"].size() == 6);
  CHECK(m["wall_time_s"].get<double>() >= 0.0);
  CHECK(parse_scenario_text(m["scenario"].get<std::string>()) == small("fig2.toml"));
}

TEST_CASE("every task type runs and records seeds") {
  const auto dir = fresh_dir("all");
  auto s = small("fig5_tolerance.toml");
  for (auto& t : s.tasks) {
    if (t.perturbation) t.perturbation->samples = 10;
  }
  const auto result = run(s, {dir, {2}, false});
  REQUIRE(result.exit_code == kExitSuccess);
  const auto m = manifest(dir);
  REQUIRE(m["seeds"].size() == 2);
  CHECK(m["seeds"][0]["seed"] == 7);
  const auto metrics = read_csv(dir / "metrics_angle_N5.csv");
  CHECK(metrics[0] == std::vector<std::string>{"quantity", "value", "unit"});
  CHECK(!fs::exists(dir / "pattern_angle_N5.svg"));

  auto gas = small("fig7_gas.toml");
  CHECK(run(gas, {dir / "gas", {2}, false}).exit_code == kExitSuccess);
  const auto shift = read_csv(dir / "gas" / "phase_shift_co2.csv");
  REQUIRE(shift.size() == 3);
  CHECK(shift[0][1] == "phase_shift_rad");
  CHECK(fs::exists(dir / "gas" / "slope_gain_co2.csv"));

  CHECK(run(small("fig8.toml"), {dir / "defect", {2}, false}).exit_code == kExitSuccess);
  const auto defect = read_csv(dir / "defect" / "defect_defect.csv");
  CHECK(std::stod(defect[1][1]) < 1e-9);
}

TEST_CASE("validation errors stop the run before any output") {
  auto s = small("fig5_tolerance.toml");
  s.tasks[1].perturbation->samples = 0;
  const auto dir = fresh_dir("invalid");
  const auto result = run(s, {dir, {}, false});
  CHECK(result.exit_code == kExitValidation);
  CHECK(result.error.find("samples") != std::string::npos);
  CHECK(!fs::exists(dir));
}

TEST_CASE("a failing task leaves a partial manifest") {
  auto s = small("fig2.toml");
  TaskSpec single;
  single.type = TaskType::metrics;
  single.name = "single";
  single.crystals = 1;
  s.tasks.insert(s.tasks.begin() + 1, single);
  const auto dir = fresh_dir("partial");
  const auto result = run(s, {dir, {}, false});
  CHECK(result.exit_code == kExitComputation);
  REQUIRE(result.tasks.size() == 2);
  CHECK(result.tasks[0].ok);
  CHECK(!result.tasks[1].ok);
  const auto m = manifest(dir);
  CHECK(m["status"] == "failed");
  CHECK(m["tasks"].size() == 2);
  CHECK(m["tasks"][1]["status"] == "failed");
  CHECK(fs::exists(dir / "pattern_N2.csv"));
  CHECK(!fs::exists(dir / "pattern_N5.csv"));
}

TEST_CASE("regression check: identity, thread counts and shipped goldens") {
  const auto one = fresh_dir("threads1");
  const auto eight = fresh_dir("threads8");
  auto s = small("fig5_tolerance.toml");
  REQUIRE(run(s, {one, {1}, false}).exit_code == kExitSuccess);
  REQUIRE(run(s, {eight, {8}, false}).exit_code == kExitSuccess);
  CHECK(regression_check(one, one).pass);
  const auto report = regression_check(one, eight, 1e-12);
  CHECK(report.pass);
  CHECK(report.notes.empty());

  for (const char* name : {"fig2", "fig4", "fig8"}) {
    CAPTURE(name);
    const auto dir = fresh_dir(std::string("golden_") + name);
    REQUIRE(run(small(std::string(name) + ".toml"), {dir, {3}, false}).exit_code == kExitSuccess);
    const auto r = regression_check(kSource / "tests" / "golden" / name, dir);
    CHECK(r.pass);
    CHECK(r.notes.empty());
  }
}

TEST_CASE("regression check: a 100 um gap change diverges at large angles") {
  const auto golden = fresh_dir("gap_golden");
  const auto shifted = fresh_dir("gap_shifted");
  auto s = small("fig2.toml");
  s.tasks.resize(2);
  REQUIRE(run(s, {golden, {}, false}).exit_code == kExitSuccess);
  s.gap_length += 100e-6;
  REQUIRE(run(s, {shifted, {}, false}).exit_code == kExitSuccess);
  const auto report = regression_check(golden, shifted);
  CHECK(!report.pass);
  CHECK(report.notes.size() == 1);  // config hash differs
  REQUIRE(report.files.size() == 2);
  for (const auto& f : report.files) {
    CHECK(!f.pass);
    CHECK(!f.first_divergence.empty());
    REQUIRE(f.min_divergent_angle_deg.has_value());
    CHECK(*f.min_divergent_angle_deg > 0.0);
  }
  // Near the axis the gap mismatch vanishes, so the central columns agree far
  // better than the edge columns.
  const auto a = read_csv(golden / "pattern_N5.csv");
  const auto b = read_csv(shifted / "pattern_N5.csv");
  double inner = 0.0;
  double outer = 0.0;
  for (std::size_t r = 1; r < a.size(); ++r) {
    const double theta = std::abs(std::stod(a[r][1]));
    const double d = std::abs(std::stod(a[r][2]) - std::stod(b[r][2]));
    if (theta <= 0.1) inner = std::max(inner, d);
    if (theta >= 0.7) outer = std::max(outer, d);
  }
  CHECK(outer > 30 * inner);
}

TEST_CASE("regression check: missing files, edits and tolerance") {
  const auto golden = fresh_dir("edit_golden");
  const auto fresh = fresh_dir("edit_fresh");
  auto s = small("fig2.toml");
  s.tasks.erase(s.tasks.begin(), s.tasks.begin() + 2);
  REQUIRE(run(s, {golden, {}, false}).exit_code == kExitSuccess);
  fs::copy(golden, fresh);

  const auto original = read_csv(fresh / "cross_section_N3.csv")[10][1];
  double v = std::stod(original);
  replace_cell(fresh / "cross_section_N3.csv", 10, 1, csv_number_for_test(v * (1 + 1e-7)));
  auto report = regression_check(golden, fresh);
  CHECK(!report.pass);
  CHECK(report.files[1].divergent_cells == 1);
  CHECK(report.files[1].first_divergence.find("row 11") != std::string::npos);
  CHECK(regression_check(golden, fresh, 1e-6).pass);
  CHECK(format_report(report).find("FAIL") != std::string::npos);

  fs::remove(fresh / "cross_section_N4.csv");
  report = regression_check(golden, fresh, 1e-6);
  CHECK(!report.pass);
  REQUIRE(report.errors.size() == 1);
  CHECK(report.errors[0].find("missing counterpart") != std::string::npos);

  fs::remove(fresh / "manifest.json");
  CHECK(!regression_check(golden, fresh).pass);
}
