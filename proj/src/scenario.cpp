#include "superlattice/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <toml.hpp>

#include "superlattice/errors.hpp"
#include "superlattice/phasematch.hpp"

namespace superlattice {
namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

struct Unit {
  std::string_view name;
  Dimension dimension;
  int decimal_exponent;  // applied to the literal
  double factor;         // applied after parsing
};

constexpr Unit kUnits[] = {
    {"nm", Dimension::length, -9, 1.0},
    {"um", Dimension::length, -6, 1.0},
    {"mm", Dimension::length, -3, 1.0},
    {"cm", Dimension::length, -2, 1.0},
    {"m", Dimension::length, 0, 1.0},
    {"deg", Dimension::angle, 0, kDegree},
    {"mrad", Dimension::angle, -3, 1.0},
    {"rad", Dimension::angle, 0, 1.0},
    {"pi", Dimension::angle, 0, std::numbers::pi},
    {"1/m", Dimension::attenuation, 0, 1.0},
    {"1/cm", Dimension::attenuation, 2, 1.0},
    {"K", Dimension::temperature, 0, 1.0},
    {"%", Dimension::ratio, -2, 1.0},
    {"ppm", Dimension::ratio, -6, 1.0},
    {"fraction", Dimension::ratio, 0, 1.0},
};

std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::length: return "length";
    case Dimension::angle: return "angle";
    case Dimension::attenuation: return "attenuation";
    case Dimension::temperature: return "temperature";
    case Dimension::ratio: return "ratio";
  }
  return "?";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_decimal(const std::string& literal) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(literal.data(), literal.data() + literal.size(), value);
  if (ec != std::errc() || ptr != literal.data() + literal.size()) return std::nan("");
  return value;
}

std::string quantity_text(double value, std::string_view unit) { return fmt::format("{} {}", value, unit); }

std::string float_text(double value) {
  std::string s = fmt::format("{}", value);
  if (s.find_first_of(".eEni") == std::string::npos) s += ".0";
  return s;
}

std::string toml_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string with_line(const std::string& message, const toml::node& node) {
  const auto& src = node.source();
  if (src.begin.line == 0) return message;
  return fmt::format("{} (line {}, column {})", message, src.begin.line, src.begin.column);
}

// Typed access to one TOML table with strict key checking.
class Reader {
 public:
  Reader(const toml::table& table, std::string prefix) : table_(table), prefix_(std::move(prefix)) {}

  void allow(std::initializer_list<std::string_view> keys) const {
    for (auto&& [k, v] : table_) {
      if (std::find(keys.begin(), keys.end(), k.str()) == keys.end()) {
        throw ValidationError(with_line("unknown key", v), qualified(k.str()));
      }
    }
  }

  bool has(std::string_view key) const { return table_.contains(key); }
  std::string qualified(std::string_view key) const { return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key); }

  const toml::node& node(std::string_view key) const {
    const toml::node* n = table_.get(key);
    if (n == nullptr) throw ValidationError("required key is missing", qualified(key));
    return *n;
  }

  double quantity(std::string_view key, Dimension dimension) const {
    const auto& n = node(key);
    if (const auto* s = n.as_string()) {
      try {
        return parse_quantity(s->get(), dimension, qualified(key));
      } catch (const UnitError& e) {
        const std::string message = std::string(e.what()).substr(e.key().size() + 2);
        throw UnitError(with_line(message, n), e.key());
      }
    }
    if (n.is_number()) {
      throw UnitError(with_line(fmt::format("missing unit; write e.g. \"{} <unit of {}>\"", n.value<double>().value(),
                                            dimension_name(dimension)),
                                n),
                      qualified(key));
    }
    throw ValidationError(with_line("expected a quantity string with a unit", n), qualified(key));
  }

  std::optional<double> optional_quantity(std::string_view key, Dimension dimension) const {
    if (!has(key)) return std::nullopt;
    return quantity(key, dimension);
  }

  double number(std::string_view key) const {
    const auto& n = node(key);
    if (!n.is_number()) throw ValidationError(with_line("expected a number", n), qualified(key));
    return n.value<double>().value();
  }

  std::int64_t integer(std::string_view key, std::int64_t min) const {
    const auto& n = node(key);
    if (!n.is_integer()) throw ValidationError(with_line("expected an integer", n), qualified(key));
    const auto v = n.value<std::int64_t>().value();
    if (v < min) throw ValidationError(with_line(fmt::format("must be at least {}", min), n), qualified(key));
    return v;
  }

  std::string string(std::string_view key) const {
    const auto& n = node(key);
    if (const auto* s = n.as_string()) return s->get();
    throw ValidationError(with_line("expected a string", n), qualified(key));
  }

  bool boolean(std::string_view key) const {
    const auto& n = node(key);
    if (const auto* b = n.as_boolean()) return b->get();
    throw ValidationError(with_line("expected true or false", n), qualified(key));
  }

  std::vector<std::int64_t> integers(std::string_view key, std::int64_t min) const {
    const auto& n = node(key);
    const auto* arr = n.as_array();
    if (arr == nullptr) throw ValidationError(with_line("expected an array of integers", n), qualified(key));
    std::vector<std::int64_t> out;
    for (const auto& item : *arr) {
      if (!item.is_integer()) throw ValidationError(with_line("expected an array of integers", item), qualified(key));
      const auto v = item.value<std::int64_t>().value();
      if (v < min) throw ValidationError(with_line(fmt::format("entries must be at least {}", min), item), qualified(key));
      out.push_back(v);
    }
    return out;
  }

  std::array<double, 3> triple(std::string_view key) const {
    const auto& n = node(key);
    const auto* arr = n.as_array();
    if (arr == nullptr || arr->size() != 3) throw ValidationError(with_line("expected an array of 3 numbers", n), qualified(key));
    std::array<double, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) {
      if (!(*arr)[i].is_number()) throw ValidationError(with_line("expected an array of 3 numbers", n), qualified(key));
      out[i] = (*arr)[i].value<double>().value();
    }
    return out;
  }

  Reader table(std::string_view key) const {
    const auto& n = node(key);
    const auto* t = n.as_table();
    if (t == nullptr) throw ValidationError(with_line("expected a table", n), qualified(key));
    return Reader(*t, qualified(key));
  }

 private:
  const toml::table& table_;
  std::string prefix_;
};

GapKind gap_kind_from(const std::string& s, const std::string& key) {
  if (s == "air") return GapKind::air;
  if (s == "constant") return GapKind::constant;
  if (s == "gas") return GapKind::gas;
  throw ValidationError(fmt::format("unknown gap medium '{}' (air, constant, gas)", s), key);
}

TaskType task_type_from(const std::string& s, const std::string& key) {
  for (auto t : {TaskType::pattern, TaskType::cross_section, TaskType::metrics, TaskType::width_ratio,
                 TaskType::perturb, TaskType::gas_compare, TaskType::defect}) {
    if (to_string(t) == s) return t;
  }
  throw ValidationError(fmt::format("unknown task type '{}'", s), key);
}

bool temperature_dependent(const UniaxialMedium& m) {
  return std::holds_alternative<TemperatureSellmeier>(m.ordinary) ||
         std::holds_alternative<TemperatureSellmeier>(m.extraordinary);
}

void read_crystal(const Reader& r, Scenario& s) {
  r.allow({"medium", "count", "length", "temperature", "sellmeier"});
  s.crystal_medium_name = r.string("medium");
  s.crystals = static_cast<std::size_t>(r.integer("count", 1));
  s.crystal_length = r.quantity("length", Dimension::length);
  if (s.crystal_medium_name == "custom") {
    const auto sm = r.table("sellmeier");
    sm.allow({"label", "ordinary_strengths", "ordinary_poles", "extraordinary_strengths", "extraordinary_poles",
              "band_min", "band_max"});
    UniaxialMedium m;
    m.label = sm.string("label");
    m.ordinary = ThreeTermSellmeier{sm.triple("ordinary_strengths"), sm.triple("ordinary_poles")};
    m.extraordinary = ThreeTermSellmeier{sm.triple("extraordinary_strengths"), sm.triple("extraordinary_poles")};
    m.band_min = sm.quantity("band_min", Dimension::length);
    m.band_max = sm.quantity("band_max", Dimension::length);
    s.crystal_medium = m;
  } else {
    if (r.has("sellmeier")) throw ValidationError("only allowed with medium = \"custom\"", r.qualified("sellmeier"));
    auto m = builtin_medium(s.crystal_medium_name);
    if (!m) {
      std::string names;
      for (const auto& n : builtin_medium_names()) names += (names.empty() ? "" : ", ") + n;
      throw ValidationError(fmt::format("unknown medium '{}' (built-in: {}, or custom)", s.crystal_medium_name, names),
                            r.qualified("medium"));
    }
    s.crystal_medium = *m;
  }
  if (r.has("temperature")) {
    if (!temperature_dependent(s.crystal_medium)) {
      throw ValidationError("this medium has no temperature dependence", r.qualified("temperature"));
    }
    s.crystal_medium.temperature = r.quantity("temperature", Dimension::temperature);
  }
}

GasSpec read_gas(const Reader& r) {
  r.allow({"background_index", "resonance_wavelength", "linewidth", "peak_absorption", "phase_target",
           "calibration_signal", "reference_concentration", "concentration"});
  GasSpec g;
  if (r.has("background_index")) g.background_index = r.number("background_index");
  if (r.has("resonance_wavelength")) g.resonance_wavelength = r.quantity("resonance_wavelength", Dimension::length);
  if (r.has("linewidth")) g.linewidth = r.quantity("linewidth", Dimension::length);
  if (r.has("reference_concentration")) {
    g.reference_concentration = r.quantity("reference_concentration", Dimension::ratio);
  }
  g.concentration = r.quantity("concentration", Dimension::ratio);
  g.peak_absorption = r.optional_quantity("peak_absorption", Dimension::attenuation);
  g.phase_target = r.optional_quantity("phase_target", Dimension::angle);
  g.calibration_signal = r.optional_quantity("calibration_signal", Dimension::length);
  return g;
}

GridSpec read_grid(const Reader& r) {
  r.allow({"center", "half_band", "wavelength_points", "max_angle", "angle_points"});
  GridSpec g;
  g.center = r.optional_quantity("center", Dimension::length);
  if (r.has("half_band")) g.half_band = r.quantity("half_band", Dimension::length);
  if (r.has("wavelength_points")) g.wavelength_points = static_cast<std::size_t>(r.integer("wavelength_points", 1));
  if (r.has("max_angle")) g.max_angle = r.quantity("max_angle", Dimension::angle);
  if (r.has("angle_points")) g.angle_points = static_cast<std::size_t>(r.integer("angle_points", 2));
  return g;
}

std::vector<std::size_t> to_sizes(const std::vector<std::int64_t>& v) {
  return {v.begin(), v.end()};
}

TaskSpec read_task(const Reader& r) {
  r.allow({"type", "name", "crystals", "disabled", "gap_medium", "cut_angle", "gap_length", "perturbed_gap",
           "gap_shift", "center", "bandwidth", "window_min", "window_max", "crystal_counts", "dense",
           "cut_angle_tolerance", "crystal_length_tolerance", "gap_length_tolerance", "distribution", "samples",
           "seed"});
  TaskSpec t;
  t.type = task_type_from(r.string("type"), r.qualified("type"));
  t.name = r.string("name");
  if (r.has("crystals")) t.crystals = static_cast<std::size_t>(r.integer("crystals", 1));
  if (r.has("disabled")) t.disabled = to_sizes(r.integers("disabled", 1));
  if (r.has("gap_medium")) t.gap_medium = gap_kind_from(r.string("gap_medium"), r.qualified("gap_medium"));
  t.cut_angle = r.optional_quantity("cut_angle", Dimension::angle);
  t.gap_length = r.optional_quantity("gap_length", Dimension::length);
  if (r.has("perturbed_gap")) t.perturbed_gap = static_cast<std::size_t>(r.integer("perturbed_gap", 1));
  if (r.has("gap_shift")) t.gap_shift = r.quantity("gap_shift", Dimension::length);
  t.center = r.optional_quantity("center", Dimension::length);
  if (r.has("bandwidth")) t.bandwidth = r.quantity("bandwidth", Dimension::length);
  if (r.has("window_min")) t.window.min_angle = r.quantity("window_min", Dimension::angle);
  if (r.has("window_max")) t.window.max_angle = r.quantity("window_max", Dimension::angle);
  if (r.has("crystal_counts")) t.crystal_counts = to_sizes(r.integers("crystal_counts", 1));
  if (r.has("dense")) t.dense = r.boolean("dense");

  const bool any_perturb = r.has("cut_angle_tolerance") || r.has("crystal_length_tolerance") ||
                           r.has("gap_length_tolerance") || r.has("distribution") || r.has("samples") ||
                           r.has("seed");
  if (t.type == TaskType::perturb) {
    PerturbationSpec p;
    if (r.has("cut_angle_tolerance")) p.cut_angle_tolerance = r.quantity("cut_angle_tolerance", Dimension::angle);
    if (r.has("crystal_length_tolerance")) {
      p.crystal_length_tolerance = r.quantity("crystal_length_tolerance", Dimension::length);
    }
    if (r.has("gap_length_tolerance")) p.gap_length_tolerance = r.quantity("gap_length_tolerance", Dimension::length);
    if (r.has("distribution")) {
      try {
        p.distribution = distribution_from_string(r.string("distribution"));
      } catch (const ValidationError& e) {
        throw ValidationError(e.what(), r.qualified("distribution"));
      }
    }
    p.samples = static_cast<std::size_t>(r.integer("samples", 0));
    p.seed = static_cast<std::uint64_t>(r.integer("seed", 0));
    t.perturbation = p;
  } else if (any_perturb) {
    throw ValidationError("perturbation fields are only allowed in perturb tasks", r.qualified("type"));
  }
  return t;
}

std::string gas_section(const GasSpec& g) {
  std::string out = "[gas]\n";
  out += fmt::format("background_index = {}\n", float_text(g.background_index));
  out += fmt::format("resonance_wavelength = {}\n", toml_string(quantity_text(g.resonance_wavelength, "m")));
  out += fmt::format("linewidth = {}\n", toml_string(quantity_text(g.linewidth, "m")));
  out += fmt::format("reference_concentration = {}\n", toml_string(quantity_text(g.reference_concentration, "fraction")));
  out += fmt::format("concentration = {}\n", toml_string(quantity_text(g.concentration, "fraction")));
  if (g.peak_absorption) out += fmt::format("peak_absorption = {}\n", toml_string(quantity_text(*g.peak_absorption, "1/m")));
  if (g.phase_target) out += fmt::format("phase_target = {}\n", toml_string(quantity_text(*g.phase_target, "rad")));
  if (g.calibration_signal) {
    out += fmt::format("calibration_signal = {}\n", toml_string(quantity_text(*g.calibration_signal, "m")));
  }
  return out;
}

template <typename T>
std::string int_list(const std::vector<T>& v) {
  return fmt::format("[{}]", fmt::join(v, ", "));
}

std::string serialize_impl(const Scenario& s, bool include_io) {
  std::string out;
  out += fmt::format("schema_version = {}\n", s.schema_version);
  if (include_io) {
    if (!s.output_dir.empty()) out += fmt::format("output_dir = {}\n", toml_string(s.output_dir));
    out += fmt::format("emit_plots = {}\n", s.emit_plots);
  }
  out += "\n[pump]\n";
  out += fmt::format("wavelength = {}\n", toml_string(quantity_text(s.pump.wavelength, "m")));
  out += fmt::format("beam_diameter = {}\n", toml_string(quantity_text(s.pump.beam_diameter, "m")));
  out += fmt::format("cut_angle = {}\n", toml_string(quantity_text(s.pump.cut_angle, "rad")));

  out += "\n[crystal]\n";
  out += fmt::format("medium = {}\n", toml_string(s.crystal_medium_name));
  out += fmt::format("count = {}\n", s.crystals);
  out += fmt::format("length = {}\n", toml_string(quantity_text(s.crystal_length, "m")));
  if (temperature_dependent(s.crystal_medium)) {
    out += fmt::format("temperature = {}\n", toml_string(quantity_text(s.crystal_medium.temperature, "K")));
  }
  if (s.crystal_medium_name == "custom") {
    const auto& m = s.crystal_medium;
    const auto* o = std::get_if<ThreeTermSellmeier>(&m.ordinary);
    const auto* e = std::get_if<ThreeTermSellmeier>(&m.extraordinary);
    if (o == nullptr || e == nullptr) throw ValidationError("custom media use the three-term form", "crystal.sellmeier");
    auto triple = [](const std::array<double, 3>& a) {
      return fmt::format("[{}, {}, {}]", float_text(a[0]), float_text(a[1]), float_text(a[2]));
    };
    out += "\n[crystal.sellmeier]\n";
    out += fmt::format("label = {}\n", toml_string(m.label));
    out += fmt::format("ordinary_strengths = {}\n", triple(o->strengths));
    out += fmt::format("ordinary_poles = {}\n", triple(o->poles_um2));
    out += fmt::format("extraordinary_strengths = {}\n", triple(e->strengths));
    out += fmt::format("extraordinary_poles = {}\n", triple(e->poles_um2));
    out += fmt::format("band_min = {}\n", toml_string(quantity_text(m.band_min, "m")));
    out += fmt::format("band_max = {}\n", toml_string(quantity_text(m.band_max, "m")));
  }

  out += "\n[gap]\n";
  if (s.gap_lengths.empty()) {
    out += fmt::format("length = {}\n", toml_string(quantity_text(s.gap_length, "m")));
  } else {
    std::vector<std::string> items;
    for (double l : s.gap_lengths) items.push_back(toml_string(quantity_text(l, "m")));
    out += fmt::format("lengths = [{}]\n", fmt::join(items, ", "));
  }
  out += fmt::format("medium = {}\n", toml_string(to_string(s.gap_medium)));
  if (s.gap_medium == GapKind::constant) out += fmt::format("index = {}\n", float_text(s.gap_index));

  if (s.gas) out += "\n" + gas_section(*s.gas);

  out += "\n[grid]\n";
  if (s.grid.center) out += fmt::format("center = {}\n", toml_string(quantity_text(*s.grid.center, "m")));
  out += fmt::format("half_band = {}\n", toml_string(quantity_text(s.grid.half_band, "m")));
  out += fmt::format("wavelength_points = {}\n", s.grid.wavelength_points);
  out += fmt::format("max_angle = {}\n", toml_string(quantity_text(s.grid.max_angle, "rad")));
  out += fmt::format("angle_points = {}\n", s.grid.angle_points);

  const AnalysisWindow default_window;
  for (const auto& t : s.tasks) {
    out += "\n[[task]]\n";
    out += fmt::format("type = {}\n", toml_string(to_string(t.type)));
    out += fmt::format("name = {}\n", toml_string(t.name));
    if (t.crystals) out += fmt::format("crystals = {}\n", *t.crystals);
    if (!t.disabled.empty()) out += fmt::format("disabled = {}\n", int_list(t.disabled));
    if (t.gap_medium) out += fmt::format("gap_medium = {}\n", toml_string(to_string(*t.gap_medium)));
    if (t.cut_angle) out += fmt::format("cut_angle = {}\n", toml_string(quantity_text(*t.cut_angle, "rad")));
    if (t.gap_length) out += fmt::format("gap_length = {}\n", toml_string(quantity_text(*t.gap_length, "m")));
    if (t.perturbed_gap) out += fmt::format("perturbed_gap = {}\n", *t.perturbed_gap);
    if (t.gap_shift != 0.0) out += fmt::format("gap_shift = {}\n", toml_string(quantity_text(t.gap_shift, "m")));
    if (t.center) out += fmt::format("center = {}\n", toml_string(quantity_text(*t.center, "m")));
    if (t.bandwidth != 0.0) out += fmt::format("bandwidth = {}\n", toml_string(quantity_text(t.bandwidth, "m")));
    if (t.window.min_angle != default_window.min_angle) {
      out += fmt::format("window_min = {}\n", toml_string(quantity_text(t.window.min_angle, "rad")));
    }
    if (t.window.max_angle != default_window.max_angle) {
      out += fmt::format("window_max = {}\n", toml_string(quantity_text(t.window.max_angle, "rad")));
    }
    if (!t.crystal_counts.empty()) out += fmt::format("crystal_counts = {}\n", int_list(t.crystal_counts));
    if (t.dense) out += "dense = true\n";
    if (t.perturbation) {
      const auto& p = *t.perturbation;
      out += fmt::format("cut_angle_tolerance = {}\n", toml_string(quantity_text(p.cut_angle_tolerance, "rad")));
      out += fmt::format("crystal_length_tolerance = {}\n", toml_string(quantity_text(p.crystal_length_tolerance, "m")));
      out += fmt::format("gap_length_tolerance = {}\n", toml_string(quantity_text(p.gap_length_tolerance, "m")));
      out += fmt::format("distribution = {}\n", toml_string(to_string(p.distribution)));
      out += fmt::format("samples = {}\n", p.samples);
      out += fmt::format("seed = {}\n", p.seed);
    }
  }
  return out;
}

// File stems a task writes; two tasks must not share one.
std::vector<std::string> output_stems(const TaskSpec& t) {
  const std::string& n = t.name;
  switch (t.type) {
    case TaskType::pattern: return {"pattern_" + n};
    case TaskType::cross_section: return {"cross_section_" + n};
    case TaskType::metrics: return {"cross_section_" + n, "metrics_" + n, "peaks_" + n};
    case TaskType::width_ratio: return {"width_ratio_" + n};
    case TaskType::perturb: return {"pattern_" + n, "cross_section_" + n, "metrics_" + n};
    case TaskType::gas_compare: {
      std::vector<std::string> out{"phase_shift_" + n, "slope_gain_" + n};
      for (std::size_t c : t.crystal_counts) {
        out.push_back(fmt::format("pattern_{}_N{}_reference", n, c));
        out.push_back(fmt::format("pattern_{}_N{}_sample", n, c));
        out.push_back(fmt::format("cross_section_{}_N{}", n, c));
      }
      return out;
    }
    case TaskType::defect: return {"pattern_" + n, "defect_" + n};
  }
  return {};
}

bool valid_name(const std::string& name) {
  if (name.empty() || name.size() > 64) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

}  // namespace

std::string_view to_string(TaskType type) {
  switch (type) {
    case TaskType::pattern: return "pattern";
    case TaskType::cross_section: return "cross_section";
    case TaskType::metrics: return "metrics";
    case TaskType::width_ratio: return "width_ratio";
    case TaskType::perturb: return "perturb";
    case TaskType::gas_compare: return "gas_compare";
    case TaskType::defect: return "defect";
  }
  return "?";
}

std::string_view to_string(GapKind kind) {
  switch (kind) {
    case GapKind::air: return "air";
    case GapKind::constant: return "constant";
    case GapKind::gas: return "gas";
  }
  return "?";
}

double parse_quantity(std::string_view text, Dimension dimension, const std::string& key) {
  const std::string_view s = trim(text);
  double probe = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), probe);
  if (ec != std::errc()) throw UnitError(fmt::format("cannot read a number from '{}'", text), key);
  std::string literal(s.data(), end);
  const std::string_view unit_name = trim(std::string_view(end, s.data() + s.size() - end));
  if (unit_name.empty()) {
    throw UnitError(fmt::format("missing unit in '{}' (expected a unit of {})", text, dimension_name(dimension)), key);
  }
  const Unit* unit = nullptr;
  for (const auto& u : kUnits) {
    if (u.name == unit_name) unit = &u;
  }
  if (unit == nullptr) throw UnitError(fmt::format("unknown unit '{}'", unit_name), key);
  if (unit->dimension != dimension) {
    throw UnitError(fmt::format("'{}' is a {} unit, expected {}", unit_name, dimension_name(unit->dimension),
                                dimension_name(dimension)),
                    key);
  }
  if (unit->decimal_exponent != 0) {
    const auto e = literal.find_first_of("eE");
    int exponent = unit->decimal_exponent;
    if (e != std::string::npos) {
      exponent += std::stoi(literal.substr(e + 1));
      literal.resize(e);
    }
    literal += "e" + std::to_string(exponent);
  }
  const double value = parse_decimal(literal) * unit->factor;
  if (!std::isfinite(value)) throw UnitError(fmt::format("'{}' is not a finite quantity", text), key);
  return value;
}

Scenario parse_scenario_text(std::string_view text, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    const auto& b = e.source().begin;
    throw ScenarioParseError(fmt::format("{}:{}:{}: {}", source, b.line, b.column, e.description()), b.line,
                             b.column);
  }
  const Reader r(root, "");
  r.allow({"schema_version", "output_dir", "emit_plots", "pump", "crystal", "gap", "gas", "grid", "task"});

  Scenario s;
  s.schema_version = static_cast<int>(r.integer("schema_version", 0));
  if (s.schema_version != kScenarioSchemaVersion) {
    throw ValidationError(fmt::format("unsupported version {} (this build reads {})", s.schema_version,
                                      kScenarioSchemaVersion),
                          "schema_version");
  }
  if (r.has("output_dir")) s.output_dir = r.string("output_dir");
  if (r.has("emit_plots")) s.emit_plots = r.boolean("emit_plots");

  const auto pump = r.table("pump");
  pump.allow({"wavelength", "beam_diameter", "cut_angle"});
  s.pump.wavelength = pump.quantity("wavelength", Dimension::length);
  s.pump.beam_diameter = pump.quantity("beam_diameter", Dimension::length);
  s.pump.cut_angle = pump.quantity("cut_angle", Dimension::angle);

  read_crystal(r.table("crystal"), s);

  if (r.has("gap")) {
    const auto gap = r.table("gap");
    gap.allow({"length", "lengths", "medium", "index"});
    if (gap.has("lengths")) {
      if (gap.has("length")) throw ValidationError("give either length or lengths", "gap");
      const auto& n = gap.node("lengths");
      const auto* arr = n.as_array();
      if (arr == nullptr) throw ValidationError(with_line("expected an array of lengths", n), "gap.lengths");
      for (std::size_t i = 0; i < arr->size(); ++i) {
        const auto* item = (*arr)[i].as_string();
        const std::string key = fmt::format("gap.lengths[{}]", i + 1);
        if (item == nullptr) throw UnitError(with_line("expected a length with a unit", (*arr)[i]), key);
        s.gap_lengths.push_back(parse_quantity(item->get(), Dimension::length, key));
      }
      if (!s.gap_lengths.empty()) s.gap_length = s.gap_lengths.front();
    } else {
      s.gap_length = gap.quantity("length", Dimension::length);
    }
    if (gap.has("medium")) s.gap_medium = gap_kind_from(gap.string("medium"), gap.qualified("medium"));
    if (gap.has("index")) {
      if (s.gap_medium != GapKind::constant) throw ValidationError("only allowed with medium = \"constant\"", "gap.index");
      s.gap_index = gap.number("index");
    } else if (s.gap_medium == GapKind::constant) {
      throw ValidationError("required for a constant-index gap", "gap.index");
    }
  } else if (s.crystals > 1) {
    throw ValidationError("required when crystal.count > 1", "gap");
  }

  if (r.has("gas")) s.gas = read_gas(r.table("gas"));
  if (r.has("grid")) s.grid = read_grid(r.table("grid"));

  if (r.has("task")) {
    const auto& n = r.node("task");
    const auto* arr = n.as_array();
    if (arr == nullptr) throw ValidationError(with_line("expected [[task]] entries", n), "task");
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const auto* t = (*arr)[i].as_table();
      if (t == nullptr) throw ValidationError(with_line("expected a table", (*arr)[i]), fmt::format("task[{}]", i + 1));
      s.tasks.push_back(read_task(Reader(*t, fmt::format("task[{}]", i + 1))));
    }
  }
  validate(s);
  return s;
}

Scenario parse_scenario(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot open scenario file '{}'", file.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_text(buffer.str(), file.string());
}

std::string serialize(const Scenario& scenario) { return serialize_impl(scenario, true); }

std::uint64_t config_hash(const Scenario& scenario) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : serialize_impl(scenario, false)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

GasModel resolve_gas(const Scenario& s) {
  if (!s.gas) throw ValidationError("a gas medium needs a [gas] table", "gas");
  const auto& g = *s.gas;
  GasModel model;
  model.background_index = g.background_index;
  model.resonance_wavelength = g.resonance_wavelength;
  model.linewidth = g.linewidth;
  model.reference_concentration = g.reference_concentration;
  model.concentration = g.concentration;
  if (g.peak_absorption) {
    model.peak_absorption = *g.peak_absorption;
    return model;
  }
  const double idler = idler_wavelength_for(s.pump.wavelength, *g.calibration_signal);
  model.peak_absorption = 1.0;
  return calibrate_gas_phase(model, *g.phase_target, idler, s.gap_length);
}

GapMedium gap_medium_for(const Scenario& s, GapKind kind) {
  switch (kind) {
    case GapKind::air: return GapMedium::constant(1.0, "air");
    case GapKind::constant: return GapMedium::constant(s.gap_index, "constant");
    case GapKind::gas: return GapMedium::gas(resolve_gas(s), "gas");
  }
  return {};
}

SuperlatticeConfig base_config(const Scenario& s) {
  TaskSpec plain;
  plain.name = "base";
  return task_config(s, plain);
}

SuperlatticeConfig task_config(const Scenario& s, const TaskSpec& t) {
  PumpSpec pump = s.pump;
  if (t.cut_angle) pump.cut_angle = *t.cut_angle;
  const std::size_t n = t.crystals.value_or(s.crystals);
  const GapKind kind = t.gap_medium.value_or(s.gap_medium);
  auto config = uniform_lattice(pump, n, s.crystal_length, t.gap_length.value_or(s.gap_length),
                                gap_medium_for(s, kind), s.crystal_medium);
  const std::string prefix = "task " + t.name;
  if (!s.gap_lengths.empty() && !t.gap_length) {
    if (s.gap_lengths.size() != config.gaps.size()) {
      throw ValidationError(fmt::format("{} crystals need {} gaps, gap.lengths has {}", n, config.gaps.size(),
                                        s.gap_lengths.size()),
                            prefix + ".crystals");
    }
    for (std::size_t i = 0; i < config.gaps.size(); ++i) config.gaps[i].length = s.gap_lengths[i];
  }
  for (std::size_t index : t.disabled) {
    if (index == 0 || index > n) {
      throw ValidationError(fmt::format("crystal {} does not exist in a {}-crystal lattice", index, n),
                            prefix + ".disabled");
    }
    config.crystals[index - 1].enabled = false;
  }
  if (t.perturbed_gap) {
    if (*t.perturbed_gap == 0 || *t.perturbed_gap > config.gaps.size()) {
      throw ValidationError(fmt::format("gap {} does not exist ({} gaps)", *t.perturbed_gap, config.gaps.size()),
                            prefix + ".perturbed_gap");
    }
    config.gaps[*t.perturbed_gap - 1].length += t.gap_shift;
  } else if (t.gap_shift != 0.0) {
    throw ValidationError("gap_shift needs perturbed_gap", prefix + ".gap_shift");
  }
  return config;
}

GridAxes grid_axes(const Scenario& s, const SuperlatticeConfig& config) {
  const double center =
      s.grid.center ? *s.grid.center : collinear_signal_wavelength(config.pump, config.crystal_medium).signal_wavelength;
  const auto& g = s.grid;
  if (g.wavelength_points == 1) return GridAxes::uniform(center, center, 1, g.max_angle, g.angle_points);
  return GridAxes::uniform(center - g.half_band, center + g.half_band, g.wavelength_points, g.max_angle,
                           g.angle_points);
}

void validate(const Scenario& s) {
  if (s.schema_version != kScenarioSchemaVersion) throw ValidationError("unsupported version", "schema_version");
  try {
    validate(s.pump);
  } catch (const ValidationError& e) {
    throw ValidationError(e.what(), "pump");
  }
  if (s.crystals == 0) throw ValidationError("must be at least 1", "crystal.count");
  if (!(s.crystal_length > 0.0)) throw ValidationError("must be positive", "crystal.length");
  if (!(s.gap_length >= 0.0)) throw ValidationError("must not be negative", "gap.length");
  if (!s.gap_lengths.empty()) {
    if (s.gap_lengths.size() + 1 != s.crystals) {
      throw ValidationError(fmt::format("{} crystals need exactly {} gaps, got {}", s.crystals, s.crystals - 1,
                                        s.gap_lengths.size()),
                            "gap.lengths");
    }
    for (double l : s.gap_lengths) {
      if (!(l >= 0.0)) throw ValidationError("must not be negative", "gap.lengths");
    }
  }
  if (s.gap_medium == GapKind::constant && !(s.gap_index >= 1.0)) throw ValidationError("must be at least 1", "gap.index");
  if (s.gas) {
    const auto& g = *s.gas;
    if (!(g.linewidth > 0.0)) throw ValidationError("must be positive", "gas.linewidth");
    if (!(g.resonance_wavelength > 0.0)) throw ValidationError("must be positive", "gas.resonance_wavelength");
    if (!(g.concentration >= 0.0)) throw ValidationError("must not be negative", "gas.concentration");
    if (!(g.reference_concentration > 0.0)) throw ValidationError("must be positive", "gas.reference_concentration");
    if (g.peak_absorption.has_value() == g.phase_target.has_value()) {
      throw ValidationError("give exactly one of peak_absorption or phase_target", "gas");
    }
    if (g.peak_absorption && !(*g.peak_absorption >= 0.0)) {
      throw ValidationError("must not be negative", "gas.peak_absorption");
    }
    if (g.phase_target.has_value() != g.calibration_signal.has_value()) {
      throw ValidationError("phase_target and calibration_signal go together", "gas");
    }
    if (g.phase_target && !(s.gap_length > 0.0)) {
      throw ValidationError("phase calibration needs a positive gap length", "gas.phase_target");
    }
  }
  const auto& g = s.grid;
  if (g.wavelength_points == 0) throw ValidationError("must be at least 1", "grid.wavelength_points");
  if (g.angle_points < 2) throw ValidationError("must be at least 2", "grid.angle_points");
  if (!(g.max_angle > 0.0)) throw ValidationError("must be positive", "grid.max_angle");
  if (g.wavelength_points > 1 && !(g.half_band > 0.0)) throw ValidationError("must be positive", "grid.half_band");

  std::set<std::string> stems;
  for (const auto& t : s.tasks) {
    const std::string prefix = "task " + t.name;
    if (!valid_name(t.name)) {
      throw ValidationError(fmt::format("'{}' must be 1-64 letters, digits, '_' or '-'", t.name), "task.name");
    }
    for (const auto& stem : output_stems(t)) {
      if (!stems.insert(stem).second) {
        throw ValidationError(fmt::format("task '{}' would overwrite '{}' of an earlier task", t.name, stem),
                              "task.name");
      }
    }
    const bool uses_gas = t.type == TaskType::gas_compare || t.gap_medium.value_or(s.gap_medium) == GapKind::gas;
    if (uses_gas && !s.gas) throw ValidationError("needs a [gas] table", prefix);

    std::vector<std::size_t> counts = t.crystal_counts;
    if (counts.empty()) counts.push_back(t.crystals.value_or(s.crystals));
    for (std::size_t n : counts) {
      TaskSpec probe = t;
      probe.crystals = n;
      const auto config = task_config(s, probe);
      try {
        validate(config);
      } catch (const ValidationError& e) {
        throw ValidationError(e.what(), prefix);
      }
    }
    if (!(t.bandwidth >= 0.0)) throw ValidationError("must not be negative", prefix + ".bandwidth");
    if (!(t.window.min_angle >= 0.0 && t.window.max_angle > t.window.min_angle)) {
      throw ValidationError("need 0 <= window_min < window_max", prefix + ".window");
    }
    if (t.window.max_angle > g.max_angle) throw ValidationError("exceeds grid.max_angle", prefix + ".window_max");
    switch (t.type) {
      case TaskType::width_ratio:
        if (t.crystal_counts.size() < 2) throw ValidationError("needs at least two entries", prefix + ".crystal_counts");
        break;
      case TaskType::gas_compare:
        if (t.gap_medium) throw ValidationError("gas_compare sets the gap medium itself", prefix + ".gap_medium");
        break;
      case TaskType::perturb:
        if (!t.perturbation) throw ValidationError("missing perturbation fields", prefix);
        if (t.perturbation->seed > static_cast<std::uint64_t>(INT64_MAX)) {
          throw ValidationError("must fit in 63 bits", prefix + ".seed");
        }
        try {
          validate(*t.perturbation);
        } catch (const ValidationError& e) {
          throw ValidationError(e.what(), prefix);
        }
        break;
      case TaskType::defect: {
        const std::size_t n = t.crystals.value_or(s.crystals);
        if (n != 5 || t.disabled != std::vector<std::size_t>{3}) {
          throw ValidationError("the defect comparison needs crystals = 5 and disabled = [3]", prefix);
        }
        if (t.gap_medium.value_or(s.gap_medium) == GapKind::gas) {
          throw ValidationError("the defect comparison needs lossless gaps", prefix + ".gap_medium");
        }
        break;
      }
      default:
        break;
    }
    if (t.type != TaskType::width_ratio && t.type != TaskType::gas_compare && !t.crystal_counts.empty()) {
      throw ValidationError("only used by width_ratio and gas_compare", prefix + ".crystal_counts");
    }
  }
}

}  // namespace superlattice
