#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "superlattice/errors.hpp"
#include "superlattice/phasematch.hpp"
#include "superlattice/scenario.hpp"
#include "test_helpers.hpp"

using namespace superlattice;
using test::deg;
using test::mm;
using test::nm;

namespace {

const std::filesystem::path kScenarios = SUPERLATTICE_SOURCE_DIR "/scenarios";

constexpr const char* kMinimal = R"(
schema_version = 1

[pump]
wavelength = "532 nm"
beam_diameter = "3 mm"
cut_angle = "50.34 deg"

[crystal]
medium = "lithium_niobate_congruent"
count = 5
length = "1 mm"

[gap]
length = "8.2 mm"
)";

std::string with(const std::string& extra) { return std::string(kMinimal) + extra; }

// Random scenario covering every optional field, built from a seeded engine.
Scenario random_scenario(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto coin = [&] { return u(rng) < 0.5; };
  Scenario s;
  s.pump.wavelength = nm(520 + 20 * u(rng));
  s.pump.beam_diameter = mm(1 + 4 * u(rng));
  s.pump.cut_angle = deg(49.5 + u(rng));
  s.crystals = 2 + static_cast<std::size_t>(4 * u(rng));
  s.crystal_length = mm(0.5 + u(rng));
  s.gap_length = mm(10 * u(rng));
  if (coin()) {
    s.crystal_medium_name = "lithium_niobate_mgo5";
    s.crystal_medium = *builtin_medium("lithium_niobate_mgo5");
    s.crystal_medium.temperature = 290 + 20 * u(rng);
  } else if (coin()) {
    s.crystal_medium_name = "custom";
    s.crystal_medium.label = "perturbed LN";
    s.crystal_medium.temperature = UniaxialMedium{}.temperature;
    auto o = std::get<ThreeTermSellmeier>(s.crystal_medium.ordinary);
    o.strengths[0] *= 1 + 1e-3 * u(rng);
    s.crystal_medium.ordinary = o;
  }
  if (coin()) {
    for (std::size_t i = 0; i + 1 < s.crystals; ++i) s.gap_lengths.push_back(mm(5 + 5 * u(rng)));
    s.gap_length = s.gap_lengths.front();
  }
  const int medium = static_cast<int>(3 * u(rng));
  s.gap_medium = medium == 0 ? GapKind::air : medium == 1 ? GapKind::constant : GapKind::gas;
  if (s.gap_medium == GapKind::constant) s.gap_index = 1.0 + 1e-4 * u(rng);
  if (s.gap_medium == GapKind::gas || coin()) {
    GasSpec g;
    g.concentration = 1e-4 * u(rng);
    g.linewidth = nm(10 + 20 * u(rng));
    if (coin()) {
      g.peak_absorption = 1000 * u(rng);
    } else {
      g.phase_target = u(rng);
      g.calibration_signal = nm(607);
      if (s.gap_length == 0.0) s.gap_length = mm(1);
      if (!s.gap_lengths.empty()) s.gap_lengths.front() = s.gap_length;
    }
    s.gas = g;
  }
  if (coin()) s.grid.center = nm(600 + 20 * u(rng));
  s.grid.wavelength_points = 1 + static_cast<std::size_t>(100 * u(rng));
  s.grid.angle_points = 2 + static_cast<std::size_t>(100 * u(rng));
  if (coin()) s.output_dir = "out/\"quoted\\dir\"";
  s.emit_plots = coin();

  TaskSpec pattern_task;
  pattern_task.type = TaskType::pattern;
  pattern_task.name = "p-1";
  pattern_task.dense = coin();
  if (coin()) pattern_task.cut_angle = deg(50 + u(rng));
  if (coin()) pattern_task.disabled = {1};
  s.tasks.push_back(pattern_task);

  TaskSpec metrics;
  metrics.type = TaskType::metrics;
  metrics.name = "m_2";
  metrics.center = nm(610.4);
  metrics.bandwidth = nm(0.4 * u(rng));
  metrics.window.min_angle = deg(0.1 * u(rng));
  metrics.perturbed_gap = 1;
  metrics.gap_shift = mm(0.1 * u(rng));
  if (s.gap_lengths.empty()) metrics.crystals = 2;
  s.tasks.push_back(metrics);

  TaskSpec perturb;
  perturb.type = TaskType::perturb;
  perturb.name = "mc";
  perturb.perturbation = PerturbationSpec{deg(0.02 * u(rng)), mm(0.1 * u(rng)), mm(0.1 * u(rng)),
                                          coin() ? Distribution::uniform : Distribution::gaussian,
                                          1 + static_cast<std::size_t>(50 * u(rng)), rng() >> 1};
  if (s.gap_lengths.empty() && coin()) perturb.gap_length = mm(3);
  s.tasks.push_back(perturb);

  TaskSpec ratio;
  ratio.type = TaskType::width_ratio;
  ratio.name = "wr";
  ratio.crystal_counts = s.gap_lengths.empty() ? std::vector<std::size_t>{2, 3, 4} : std::vector<std::size_t>{};
  if (s.gap_lengths.empty()) s.tasks.push_back(ratio);

  if (s.gas) {
    TaskSpec gas;
    gas.type = TaskType::gas_compare;
    gas.name = "gas";
    s.tasks.push_back(gas);
  }
  return s;
}

}  // namespace

TEST_CASE("quantities carry explicit units") {
  CHECK(parse_quantity("532 nm", Dimension::length, "k") == 532e-9);
  CHECK(parse_quantity("8.2 mm", Dimension::length, "k") == parse_quantity("8200 um", Dimension::length, "k"));
  CHECK(parse_quantity("8.2 mm", Dimension::length, "k") == parse_quantity("0.0082 m", Dimension::length, "k"));
  CHECK(parse_quantity("8.2e3um", Dimension::length, "k") == 0.0082);
  CHECK(parse_quantity("50.34 deg", Dimension::angle, "k") == doctest::Approx(deg(50.34)).epsilon(1e-15));
  CHECK(parse_quantity("0.23 pi", Dimension::angle, "k") == doctest::Approx(0.23 * std::numbers::pi));
  CHECK(parse_quantity("0.02 %", Dimension::ratio, "k") == parse_quantity("200 ppm", Dimension::ratio, "k"));
  CHECK(parse_quantity("7 1/cm", Dimension::attenuation, "k") == 700.0);
  CHECK_THROWS_AS(parse_quantity("50.34", Dimension::angle, "k"), UnitError);
  CHECK_THROWS_AS(parse_quantity("50.34 nm", Dimension::angle, "k"), UnitError);
  CHECK_THROWS_AS(parse_quantity("5 furlongs", Dimension::length, "k"), UnitError);
  CHECK_THROWS_AS(parse_quantity("nm", Dimension::length, "k"), UnitError);
  CHECK_THROWS_AS(parse_quantity("inf nm", Dimension::length, "k"), UnitError);
}

TEST_CASE("shipped fig2 scenario") {
  const auto s = parse_scenario(kScenarios / "fig2.toml");
  CHECK(s.pump.wavelength == nm(532));
  CHECK(s.pump.cut_angle == doctest::Approx(deg(50.34)));
  CHECK(s.crystal_length == mm(1));
  CHECK(s.gap_length == 8.2e-3);
  CHECK(s.crystal_medium == congruent_lithium_niobate());
  REQUIRE(s.tasks.size() == 6);
  CHECK(s.tasks[0].type == TaskType::pattern);
  CHECK(s.tasks[0].crystals == 2u);
  CHECK(s.tasks[1].crystals == 5u);
  CHECK(s.tasks[5].center == nm(610.4));
  const auto config = task_config(s, s.tasks[1]);
  CHECK(config == uniform_lattice(s.pump, 5, 1e-3, 8.2e-3));
  const auto grid = grid_axes(s, config);
  CHECK(grid.signal_wavelengths.size() == 801);
  CHECK(grid.external_angles.size() == 601);
}

TEST_CASE("every shipped scenario parses and round-trips") {
  for (const auto& entry : std::filesystem::directory_iterator(kScenarios)) {
    CAPTURE(entry.path());
    const auto s = parse_scenario(entry.path());
    CHECK(parse_scenario_text(serialize(s)) == s);
  }
}

TEST_CASE("missing unit is a unit error with its position") {
  const std::string text = std::string(kMinimal).replace(std::string(kMinimal).find("\"50.34 deg\""), 11, "\"50.34\"");
  CHECK_THROWS_AS(parse_scenario_text(text), UnitError);
  CHECK_THROWS_WITH(parse_scenario_text(text), doctest::Contains("pump.cut_angle"));
  const std::string bare = std::string(kMinimal).replace(std::string(kMinimal).find("\"50.34 deg\""), 11, "50.34");
  CHECK_THROWS_WITH_AS(parse_scenario_text(bare), doctest::Contains("line 7"), UnitError);
}

TEST_CASE("five crystals with three gaps is a structural error") {
  const std::string text = std::string(kMinimal).replace(std::string(kMinimal).find("length = \"8.2 mm\""), 17,
                                                         "lengths = [\"8.2 mm\", \"8.2 mm\", \"8.2 mm\"]");
  CHECK_THROWS_WITH_AS(parse_scenario_text(text), doctest::Contains("gap.lengths"), ValidationError);
  const std::string four = std::string(kMinimal).replace(std::string(kMinimal).find("length = \"8.2 mm\""), 17,
                                                         "lengths = [\"8.2 mm\", \"8.2 mm\", \"8.2 mm\", \"8.3 mm\"]");
  const auto s = parse_scenario_text(four);
  CHECK(base_config(s).gaps.back().length == mm(8.3));
}

TEST_CASE("strict keys, versions and references") {
  CHECK_THROWS_WITH_AS(parse_scenario_text(with("colour = \"red\"\n[grid]\n")), doctest::Contains("gap.colour"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(parse_scenario_text(std::string(kMinimal).replace(std::string(kMinimal).find("= 1") + 2, 1, "2")),
                       doctest::Contains("schema_version"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_scenario_text(with("[[task]]\ntype = \"pattern\"\nname = \"a\"\ndisabled = [6]\n")),
                       doctest::Contains("crystal 6 does not exist"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_scenario_text(with("[[task]]\ntype = \"fourier\"\nname = \"a\"\n")),
                       doctest::Contains("unknown task type"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_scenario_text(with("[[task]]\ntype = \"pattern\"\nname = \"a\"\n"
                                                "[[task]]\ntype = \"pattern\"\nname = \"a\"\n")),
                       doctest::Contains("overwrite"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_scenario_text(with("[[task]]\ntype = \"gas_compare\"\nname = \"g\"\n")),
                       doctest::Contains("[gas]"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_scenario_text(with("[[task]]\ntype = \"pattern\"\nname = \"a\"\nseed = 3\n")),
                       doctest::Contains("only allowed in perturb"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_scenario_text(with("[[task]]\ntype = \"perturb\"\nname = \"a\"\nsamples = 10\n")),
                       doctest::Contains("seed"), ValidationError);
  CHECK_THROWS_AS(parse_scenario_text(with("[[task]]\ntype = \"perturb\"\nname = \"a\"\nsamples = 0\nseed = 1\n")),
                  ValidationError);
  CHECK_THROWS_AS(parse_scenario_text(with("[[task]]\ntype = \"defect\"\nname = \"d\"\ndisabled = [2]\n")),
                  ValidationError);
  CHECK_THROWS_AS(parse_scenario(kScenarios / "does_not_exist.toml"), ValidationError);
}

TEST_CASE("malformed files report line and column") {
  try {
    parse_scenario_text("schema_version = 1\n[pump\nwavelength = \"532 nm\"\n", "broken.toml");
    FAIL("expected a parse error");
  } catch (const ScenarioParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() > 0);
    CHECK(std::string(e.what()).find("broken.toml:2:") == 0);
  }
}

TEST_CASE("inline Sellmeier media and temperatures") {
  const std::string head = R"(
schema_version = 1
[pump]
wavelength = "532 nm"
beam_diameter = "3 mm"
cut_angle = "50.34 deg"
[gap]
length = "8.2 mm"
)";
  const auto custom = parse_scenario_text(head + R"(
[crystal]
medium = "custom"
count = 2
length = "1 mm"
[crystal.sellmeier]
label = "LN copy"
ordinary_strengths = [2.6734, 1.2290, 12.614]
ordinary_poles = [0.01764, 0.05914, 474.60]
extraordinary_strengths = [2.9804, 0.5981, 8.9543]
extraordinary_poles = [0.02047, 0.0666, 416.08]
band_min = "0.4 um"
band_max = "5 um"
)");
  CHECK(collinear_signal_wavelength(custom.pump, custom.crystal_medium).signal_wavelength ==
        doctest::Approx(collinear_signal_wavelength(custom.pump, congruent_lithium_niobate()).signal_wavelength)
            .epsilon(1e-12));
  CHECK(parse_scenario_text(serialize(custom)) == custom);

  const auto warm = parse_scenario_text(head + R"(
[crystal]
medium = "lithium_niobate_mgo5"
count = 2
length = "1 mm"
temperature = "313.15 K"
)");
  CHECK(warm.crystal_medium.temperature == 313.15);
  CHECK_THROWS_WITH_AS(parse_scenario_text(head + R"(
[crystal]
medium = "lithium_niobate_congruent"
count = 2
length = "1 mm"
temperature = "313.15 K"
)"),
                       doctest::Contains("no temperature dependence"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_scenario_text(head + R"(
[crystal]
medium = "quartz"
count = 2
length = "1 mm"
)"),
                       doctest::Contains("lithium_niobate_mgo5"), ValidationError);
}

TEST_CASE("scenario round-trip over random scenarios") {
  std::mt19937_64 rng(20240601);
  for (int i = 0; i < 300; ++i) {
    const auto s = random_scenario(rng);
    CAPTURE(i);
    validate(s);
    const auto text = serialize(s);
    const auto back = parse_scenario_text(text);
    CHECK(back == s);
    CHECK(serialize(back) == text);
    CHECK(config_hash(back) == config_hash(s));
  }
}

TEST_CASE("config hash follows physically meaningful fields only") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 50; ++i) {
    const auto s = random_scenario(rng);
    const auto h = config_hash(s);

    auto io = s;
    io.output_dir = "elsewhere";
    io.emit_plots = !s.emit_plots;
    CHECK(config_hash(io) == h);

    std::vector<Scenario> changed(12, s);
    changed[0].pump.wavelength *= 1 + 1e-12;
    changed[1].pump.cut_angle += 1e-9;
    changed[2].pump.beam_diameter *= 1.1;
    changed[3].crystal_length += 1e-9;
    changed[4].crystals += 1;
    changed[5].gap_length += 1e-6;
    if (!changed[5].gap_lengths.empty()) changed[5].gap_lengths.back() += 1e-6;
    changed[6].grid.angle_points += 2;
    changed[7].grid.max_angle *= 0.99;
    changed[8].tasks[0].dense = !s.tasks[0].dense;
    changed[9].tasks[2].perturbation->seed += 1;
    changed[10].tasks[1].bandwidth += 1e-12;
    changed[11].gap_medium = s.gap_medium == GapKind::air ? GapKind::constant : GapKind::air;
    for (std::size_t k = 0; k < changed.size(); ++k) {
      CAPTURE(k);
      CHECK(config_hash(changed[k]) != h);
    }
  }
  // Equivalent unit spellings give the same configuration and hash.
  const auto a = parse_scenario_text(kMinimal);
  const auto b = parse_scenario_text(std::string(kMinimal).replace(std::string(kMinimal).find("\"8.2 mm\""), 8,
                                                                   "\"8200 um\""));
  CHECK(a == b);
  CHECK(config_hash(a) == config_hash(b));
}

TEST_CASE("gas calibration from a phase target") {
  const auto s = parse_scenario(kScenarios / "fig7_gas.toml");
  const auto gas = resolve_gas(s);
  const double idler = idler_wavelength_for(nm(532), nm(607));
  const double dn = gas_complex_index(gas, idler).real() - gas.background_index;
  CHECK(2 * std::numbers::pi / idler * dn * mm(8.2) == doctest::Approx(0.23 * std::numbers::pi).epsilon(1e-9));
  CHECK(gas.concentration == doctest::Approx(2e-4).epsilon(1e-15));
}
