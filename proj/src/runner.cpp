#include "superlattice/runner.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>

#include "csv.hpp"
#include "plot.hpp"
#include "superlattice/errors.hpp"
#include "superlattice/phasematch.hpp"

namespace superlattice {
namespace {

using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

constexpr double kToDeg = 180.0 / std::numbers::pi;
constexpr double kInnerMax = 0.3 / kToDeg;
constexpr double kOuterMin = 0.75 / kToDeg;
constexpr double kOuterMax = 0.85 / kToDeg;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

class TaskContext {
 public:
  TaskContext(const Scenario& scenario, const TaskSpec& task, const fs::path& dir, const ExecutionOptions& exec,
              bool plots, TaskRecord& record)
      : scenario(scenario), task(task), exec(exec), dir_(dir), plots_(plots), record_(record) {}

  const Scenario& scenario;
  const TaskSpec& task;
  const ExecutionOptions& exec;

  SuperlatticeConfig config(std::optional<std::size_t> crystals = std::nullopt,
                            std::optional<GapKind> gap = std::nullopt) const {
    TaskSpec t = task;
    if (crystals) t.crystals = crystals;
    if (gap) t.gap_medium = gap;
    return task_config(scenario, t);
  }

  double center(const SuperlatticeConfig& config) const {
    if (task.center) return *task.center;
    if (scenario.grid.center) return *scenario.grid.center;
    return collinear_signal_wavelength(config.pump, config.crystal_medium).signal_wavelength;
  }

  void save(const std::string& file, const csv::Writer& writer) {
    writer.save(dir_ / file);
    record_.files.push_back(file);
  }

  void save_svg(const std::string& file, const std::string& svg) {
    if (!plots_) return;
    write_text(dir_ / file, svg);
    record_.files.push_back(file);
  }

  void save_pattern(const std::string& stem, const InterferencePattern& p) {
    csv::Writer long_form({"lambda_s_nm", "theta_s_deg", "intensity"});
    for (std::size_t r = 0; r < p.rows(); ++r) {
      for (std::size_t c = 0; c < p.columns(); ++c) {
        long_form.row({p.signal_wavelengths[r] * 1e9, p.external_angles[c] * kToDeg, p.at(r, c)});
      }
    }
    save(stem + ".csv", long_form);
    if (task.dense) {
      std::vector<std::string> header{"lambda_s_nm"};
      for (double theta : p.external_angles) header.push_back("theta_s_deg=" + csv::number(theta * kToDeg));
      csv::Writer dense(header);
      for (std::size_t r = 0; r < p.rows(); ++r) {
        std::vector<double> row{p.signal_wavelengths[r] * 1e9};
        const auto values = p.row(r);
        row.insert(row.end(), values.begin(), values.end());
        dense.row(row);
      }
      save(stem + "_dense.csv", dense);
    }
    save_svg(stem + ".svg", plot::heatmap_svg(p, stem));
  }

  void save_sections(const std::string& stem, const std::vector<std::pair<std::string, const CrossSection*>>& sections) {
    std::vector<std::string> header{"theta_s_deg"};
    for (const auto& [label, s] : sections) header.push_back(label);
    csv::Writer w(header);
    const auto& angles = sections.front().second->angles;
    std::vector<double> x;
    for (std::size_t c = 0; c < angles.size(); ++c) {
      std::vector<double> row{angles[c] * kToDeg};
      for (const auto& entry : sections) row.push_back(entry.second->intensity[c]);
      w.row(row);
      x.push_back(angles[c] * kToDeg);
    }
    save(stem + ".csv", w);
    std::vector<plot::Series> series;
    for (const auto& [label, s] : sections) series.push_back({label, s->intensity});
    const auto* first = sections.front().second;
    save_svg(stem + ".svg",
             plot::line_svg(x, series, "external signal angle (deg)", "normalized intensity",
                            fmt::format("{} at {:.2f} nm", stem, first->center_wavelength * 1e9)));
  }

  void save_quantities(const std::string& file, const std::vector<std::tuple<std::string, double, std::string>>& rows) {
    csv::Writer w({"quantity", "value", "unit"});
    for (const auto& [q, v, u] : rows) w.text_row({q, csv::number(v), u});
    save(file, w);
  }

 private:
  fs::path dir_;
  bool plots_;
  TaskRecord& record_;
};

std::vector<std::tuple<std::string, double, std::string>> metric_rows(const std::string& prefix,
                                                                      const CrossSection& section,
                                                                      const AnalysisWindow& window) {
  const auto m = fringe_metrics(section, window);
  return {
      {prefix + "mean_width", m.mean_width * kToDeg, "deg"},
      {prefix + "visibility", m.visibility, "1"},
      {prefix + "window_peaks", static_cast<double>(m.window_peaks), "count"},
      {prefix + "visibility_inner", visibility(section, 0.0, kInnerMax), "1"},
      {prefix + "visibility_outer", visibility(section, kOuterMin, std::min(kOuterMax, section.angles.back())), "1"},
  };
}

void run_pattern(TaskContext& ctx) {
  const auto config = ctx.config();
  ctx.save_pattern("pattern_" + ctx.task.name, pattern(config, grid_axes(ctx.scenario, config), ctx.exec));
}

void run_cross_section(TaskContext& ctx) {
  const auto config = ctx.config();
  const auto p = pattern(config, grid_axes(ctx.scenario, config), ctx.exec);
  const auto s = cross_section(p, ctx.center(config), ctx.task.bandwidth);
  ctx.save_sections("cross_section_" + ctx.task.name, {{"intensity", &s}});
}

void run_metrics(TaskContext& ctx) {
  const auto config = ctx.config();
  const auto p = pattern(config, grid_axes(ctx.scenario, config), ctx.exec);
  const auto s = cross_section(p, ctx.center(config), ctx.task.bandwidth);
  const auto m = fringe_metrics(s, ctx.task.window);
  ctx.save_sections("cross_section_" + ctx.task.name, {{"intensity", &s}});
  auto rows = metric_rows("", s, ctx.task.window);
  rows.insert(rows.begin(), {{"crystals", static_cast<double>(config.enabled_count()), "count"},
                             {"center_wavelength", s.center_wavelength * 1e9, "nm"},
                             {"bandwidth", s.averaging_bandwidth * 1e9, "nm"}});
  ctx.save_quantities("metrics_" + ctx.task.name + ".csv", rows);
  csv::Writer peaks({"theta_s_deg", "width_deg"});
  for (std::size_t i = 0; i < m.peak_angles.size(); ++i) peaks.row({m.peak_angles[i] * kToDeg, m.widths[i] * kToDeg});
  ctx.save("peaks_" + ctx.task.name + ".csv", peaks);
}

void run_width_ratio(TaskContext& ctx) {
  std::vector<SuperlatticeConfig> configs;
  for (std::size_t n : ctx.task.crystal_counts) configs.push_back(ctx.config(n));
  const auto grid = grid_axes(ctx.scenario, configs.front());
  const auto curve =
      width_ratio_curve(configs, grid, ctx.center(configs.front()), ctx.task.bandwidth, ctx.task.window, ctx.exec);
  csv::Writer w({"crystals", "mean_width_deg", "width_ratio"});
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& point : curve) {
    w.row({static_cast<double>(point.crystals), point.mean_width * kToDeg, point.ratio});
    x.push_back(static_cast<double>(point.crystals));
    y.push_back(point.ratio);
  }
  ctx.save("width_ratio_" + ctx.task.name + ".csv", w);
  ctx.save_svg("width_ratio_" + ctx.task.name + ".svg",
               plot::line_svg(x, {{"width ratio", y}}, "crystals", "mean width ratio", "width_ratio " + ctx.task.name));
}

void run_perturb(TaskContext& ctx) {
  const auto base = ctx.config();
  const auto grid = grid_axes(ctx.scenario, base);
  const auto& spec = *ctx.task.perturbation;
  const auto ensemble = ensemble_pattern(sample_configs(base, spec), grid, ctx.exec);
  const auto ideal = pattern(base, grid, ctx.exec);
  const double center = ctx.center(base);
  const auto s_ideal = cross_section(ideal, center, ctx.task.bandwidth);
  const auto s_ensemble = cross_section(ensemble, center, ctx.task.bandwidth);
  ctx.save_pattern("pattern_" + ctx.task.name, ensemble);
  ctx.save_sections("cross_section_" + ctx.task.name, {{"intensity_ideal", &s_ideal}, {"intensity_ensemble", &s_ensemble}});
  std::vector<std::tuple<std::string, double, std::string>> rows{
      {"crystals", static_cast<double>(base.enabled_count()), "count"},
      {"samples", static_cast<double>(spec.samples), "count"},
      {"seed", static_cast<double>(spec.seed), "1"},
      {"cut_angle_tolerance", spec.cut_angle_tolerance * kToDeg, "deg"},
      {"crystal_length_tolerance", spec.crystal_length_tolerance * 1e3, "mm"},
      {"gap_length_tolerance", spec.gap_length_tolerance * 1e3, "mm"},
  };
  for (auto& r : metric_rows("ideal_", s_ideal, ctx.task.window)) rows.push_back(r);
  for (auto& r : metric_rows("ensemble_", s_ensemble, ctx.task.window)) rows.push_back(r);
  ctx.save_quantities("metrics_" + ctx.task.name + ".csv", rows);
}

void run_gas_compare(TaskContext& ctx) {
  std::vector<std::size_t> counts = ctx.task.crystal_counts;
  if (counts.empty()) counts.push_back(ctx.task.crystals.value_or(ctx.scenario.crystals));
  csv::Writer shifts({"crystals", "phase_shift_rad", "uncertainty_rad", "phase_shift_over_pi", "visibility_reference",
                      "visibility_sample"});
  std::vector<CrossSection> refs;
  std::vector<CrossSection> samples;
  for (std::size_t n : counts) {
    const auto reference = ctx.config(n, GapKind::air);
    const auto sample = ctx.config(n, GapKind::gas);
    const auto grid = grid_axes(ctx.scenario, reference);
    const double center = ctx.center(reference);
    const auto p_ref = pattern(reference, grid, ctx.exec);
    const auto p_gas = pattern(sample, grid, ctx.exec);
    const std::string stem = fmt::format("{}_N{}", ctx.task.name, n);
    ctx.save_pattern("pattern_" + stem + "_reference", p_ref);
    ctx.save_pattern("pattern_" + stem + "_sample", p_gas);
    refs.push_back(cross_section(p_ref, center, ctx.task.bandwidth));
    samples.push_back(cross_section(p_gas, center, ctx.task.bandwidth));
    ctx.save_sections("cross_section_" + stem, {{"intensity_reference", &refs.back()}, {"intensity_sample", &samples.back()}});
    const auto shift = phase_shift(refs.back(), samples.back(), static_cast<int>(n), ctx.task.window);
    const auto& w = ctx.task.window;
    shifts.row({static_cast<double>(n), shift.value, shift.uncertainty, shift.value / std::numbers::pi,
                visibility(refs.back(), w.min_angle, w.max_angle), visibility(samples.back(), w.min_angle, w.max_angle)});
  }
  ctx.save("phase_shift_" + ctx.task.name + ".csv", shifts);
  if (counts.size() >= 2) {
    csv::Writer gains({"crystals_from", "crystals_to", "slope_gain_reference", "slope_gain_sample"});
    for (std::size_t i = 1; i < counts.size(); ++i) {
      gains.row({static_cast<double>(counts.front()), static_cast<double>(counts[i]),
                 slope_gain(refs.front(), refs[i], ctx.task.window), slope_gain(samples.front(), samples[i], ctx.task.window)});
    }
    ctx.save("slope_gain_" + ctx.task.name + ".csv", gains);
  }
}

void run_defect(TaskContext& ctx) {
  const auto config = ctx.config();
  const auto grid = grid_axes(ctx.scenario, config);
  const auto p = pattern(config, grid, ctx.exec);
  const double l = config.crystals.front().length;
  const double gap = config.gaps.front().length;
  const auto& medium = detection_medium(config);
  std::vector<double> row_max(p.rows(), 0.0);
  parallel_rows(p.rows(), ctx.exec.threads, [&](std::size_t r) {
    for (std::size_t c = 0; c < p.columns(); ++c) {
      const auto point = kinematics(config.pump, config.crystal_medium, medium, p.signal_wavelengths[r],
                                    p.external_angles[c], {l, gap});
      if (point.evanescent) continue;
      const double expected = defect_closed_form(point, l, gap) / p.normalization;
      const double actual = p.at(r, c);
      const double scale = std::max({std::abs(actual), std::abs(expected), 1e-6});
      row_max[r] = std::max(row_max[r], std::abs(actual - expected) / scale);
    }
  });
  double worst = 0.0;
  for (double v : row_max) worst = std::max(worst, v);
  ctx.save_pattern("pattern_" + ctx.task.name, p);
  ctx.save_quantities("defect_" + ctx.task.name + ".csv",
                      {{"max_relative_deviation", worst, "1"}, {"normalization", p.normalization, "1"}});
}

void run_task(TaskContext& ctx) {
  switch (ctx.task.type) {
    case TaskType::pattern: return run_pattern(ctx);
    case TaskType::cross_section: return run_cross_section(ctx);
    case TaskType::metrics: return run_metrics(ctx);
    case TaskType::width_ratio: return run_width_ratio(ctx);
    case TaskType::perturb: return run_perturb(ctx);
    case TaskType::gas_compare: return run_gas_compare(ctx);
    case TaskType::defect: return run_defect(ctx);
  }
}

nlohmann::json manifest_json(const Scenario& s, const RunResult& result, unsigned threads) {
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& t : s.tasks) {
    if (t.perturbation) seeds.push_back({{"task", t.name}, {"seed", t.perturbation->seed}});
  }
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& t : result.tasks) {
    nlohmann::json entry{{"name", t.name},     {"type", std::string(to_string(t.type))},
                         {"status", t.ok ? "ok" : "failed"}, {"files", t.files},
                         {"seconds", t.seconds}};
    if (!t.ok) entry["error"] = t.error;
    tasks.push_back(entry);
  }
  return {
      {"tool", "superlattice"},
      {"version", SUPERLATTICE_VERSION},
      {"schema_version", s.schema_version},
      {"config_hash", format_hash(config_hash(s))},
      {"seeds", seeds},
      {"threads", threads},
      {"status", result.exit_code == kExitSuccess ? "complete" : "failed"},
      {"error", result.error},
      {"wall_time_s", result.wall_time},
      {"tasks", tasks},
      {"scenario", serialize(s)},
  };
}

}  // namespace

std::string format_hash(std::uint64_t hash) { return fmt::format("{:016x}", hash); }

RunResult run(const Scenario& scenario, const RunOptions& options) {
  const auto start = Clock::now();
  RunResult result;
  try {
    validate(scenario);
  } catch (const ValidationError& e) {
    result.exit_code = kExitValidation;
    result.error = e.what();
    return result;
  }

  result.output_dir = !options.output_dir.empty()          ? options.output_dir
                      : !scenario.output_dir.empty() ? fs::path(scenario.output_dir)
                                                     : fs::current_path();
  std::error_code ec;
  fs::create_directories(result.output_dir, ec);
  if (ec || !fs::is_directory(result.output_dir)) {
    result.exit_code = kExitValidation;
    result.error = fmt::format("output_dir: cannot create '{}'", result.output_dir.string());
    return result;
  }
  const bool plots = options.emit_plots.value_or(scenario.emit_plots);

  for (const auto& task : scenario.tasks) {
    const auto task_start = Clock::now();
    TaskRecord record;
    record.name = task.name;
    record.type = task.type;
    try {
      TaskContext ctx(scenario, task, result.output_dir, options.exec, plots, record);
      run_task(ctx);
      record.ok = true;
    } catch (const ValidationError& e) {
      record.error = e.what();
      result.exit_code = kExitValidation;
    } catch (const std::exception& e) {
      record.error = e.what();
      result.exit_code = kExitComputation;
    }
    record.seconds = seconds_since(task_start);
    result.tasks.push_back(record);
    if (!record.ok) {
      result.error = fmt::format("task '{}': {}", task.name, record.error);
      break;
    }
  }
  result.wall_time = seconds_since(start);
  write_text(result.output_dir / "manifest.json", manifest_json(scenario, result, options.exec.threads).dump(2) + "\n");
  return result;
}

}  // namespace superlattice
