#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <vector>

#include "superlattice/analysis.hpp"
#include "superlattice/errors.hpp"
#include "superlattice/perturb.hpp"
#include "test_helpers.hpp"

using namespace superlattice;
using test::deg;
using test::mm;
using test::nm;

namespace {

const PumpSpec kPump{nm(532), mm(3), deg(50.34)};

GridAxes row_grid(double signal = nm(610.4)) {
  return GridAxes::uniform(signal, signal, 1, kDefaultMaxAngle, kDefaultAnglePoints);
}

double mean_width(const InterferencePattern& p) { return fringe_metrics(cross_section(p, nm(610.4), 0.0)).mean_width; }

}  // namespace

TEST_CASE("zero tolerances reproduce the base exactly") {
  const auto base = uniform_lattice(kPump, 5, mm(1), mm(8.2));
  PerturbationSpec spec;
  spec.samples = 7;
  spec.seed = 99;
  spec.distribution = Distribution::gaussian;
  for (const auto& config : sample_configs(base, spec)) CHECK(config == base);
}

TEST_CASE("sampling is deterministic per seed") {
  const auto base = uniform_lattice(kPump, 5, mm(1), mm(8.2));
  PerturbationSpec spec{deg(0.02), mm(0.1), mm(0.1), Distribution::uniform, 50, 1234};
  const auto a = sample_configs(base, spec);
  const auto b = sample_configs(base, spec);
  CHECK(a == b);
  spec.seed = 1235;
  CHECK(sample_configs(base, spec) != a);
}

TEST_CASE("uniform cut-angle offsets: mean and range") {
  const auto base = uniform_lattice(kPump, 5, mm(1), mm(8.2));
  PerturbationSpec spec;
  spec.cut_angle_tolerance = deg(0.02);
  spec.samples = 10000;
  spec.seed = 2024;
  const auto samples = sample_configs(base, spec);
  for (std::size_t i = 0; i < 5; ++i) {
    double sum = 0.0;
    double lo = 1.0;
    double hi = -1.0;
    for (const auto& s : samples) {
      const double v = s.crystals[i].cut_angle_offset;
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double mean = sum / static_cast<double>(samples.size());
    const double sigma = deg(0.02) / std::sqrt(3.0) / std::sqrt(static_cast<double>(samples.size()));
    CHECK(std::abs(mean) < 3 * sigma);
    CHECK(lo >= -deg(0.02));
    CHECK(hi <= deg(0.02));
    CHECK(hi - lo > 1.99 * deg(0.02));
  }
}

TEST_CASE("gaussian variates have unit variance") {
  double sum = 0.0;
  double sum2 = 0.0;
  constexpr int kCount = 20000;
  for (int i = 0; i < kCount; ++i) {
    const double z = unit_variate(5, i, 0, PerturbedQuantity::gap_length, Distribution::gaussian);
    sum += z;
    sum2 += z * z;
  }
  CHECK(std::abs(sum / kCount) < 4.0 / std::sqrt(kCount));
  CHECK(sum2 / kCount == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("variates are independent of draw order and paired across tolerance levels") {
  const auto base = uniform_lattice(kPump, 3, mm(1), mm(8.2));
  PerturbationSpec small{deg(0.01), 0.0, 0.0, Distribution::uniform, 4, 77};
  PerturbationSpec large = small;
  large.cut_angle_tolerance = deg(0.02);
  const auto a = sample_configs(base, small);
  const auto b = sample_configs(base, large);
  for (std::size_t s = 0; s < a.size(); ++s) {
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(b[s].crystals[i].cut_angle_offset == doctest::Approx(2.0 * a[s].crystals[i].cut_angle_offset));
    }
  }
  const double direct = unit_variate(77, 3, 2, PerturbedQuantity::cut_angle, Distribution::uniform);
  CHECK(a[3].crystals[2].cut_angle_offset == deg(0.01) * direct);
}

TEST_CASE("spec validation") {
  PerturbationSpec spec;
  spec.samples = 0;
  CHECK_THROWS_AS(validate(spec), ValidationError);
  spec.samples = 1;
  spec.gap_length_tolerance = -1.0;
  CHECK_THROWS_AS(validate(spec), ValidationError);
  CHECK(distribution_from_string("gaussian") == Distribution::gaussian);
  CHECK_THROWS_AS(distribution_from_string("cauchy"), ValidationError);
  CHECK_THROWS_AS(ensemble_pattern({}, row_grid()), ValidationError);
}

TEST_CASE("ensemble of one equals the pattern") {
  const auto config = uniform_lattice(kPump, 5, mm(1), mm(8.2));
  const auto grid = GridAxes::uniform(nm(610), nm(611), 5, kDefaultMaxAngle, 301);
  const auto single = pattern(config, grid);
  const auto ensemble = ensemble_pattern({config}, grid);
  CHECK(ensemble.intensity == single.intensity);
  CHECK(ensemble.normalization == single.normalization);
}

TEST_CASE("ensemble reduction is independent of the thread count") {
  const auto base = uniform_lattice(kPump, 5, mm(1), mm(8.2));
  const auto samples = sample_configs(base, {deg(0.02), 0.0, mm(0.05), Distribution::uniform, 13, 3});
  const auto grid = GridAxes::uniform(nm(610), nm(611), 9, kDefaultMaxAngle, 301);
  const auto one = ensemble_pattern(samples, grid, {1});
  const auto four = ensemble_pattern(samples, grid, {4});
  CHECK(std::memcmp(one.intensity.data(), four.intensity.data(), one.intensity.size() * sizeof(double)) == 0);
}

TEST_CASE("cut-angle tolerance broadens fringes monotonically") {
  const auto base = uniform_lattice(kPump, 5, mm(1), mm(8.2));
  std::vector<double> widths;
  for (double tol : {0.0, 0.01, 0.02}) {
    PerturbationSpec spec{deg(tol), 0.0, 0.0, Distribution::uniform, 200, 42};
    widths.push_back(mean_width(ensemble_pattern(sample_configs(base, spec), row_grid())));
  }
  CHECK(widths[1] > widths[0]);
  CHECK(widths[2] > widths[1]);
}

TEST_CASE("angle tolerance dominates crystal-length and single-gap errors") {
  const auto base = uniform_lattice(kPump, 5, mm(1), mm(8.2));
  const double ideal = mean_width(pattern(base, row_grid()));
  const double angle =
      mean_width(ensemble_pattern(sample_configs(base, {deg(0.02), 0.0, 0.0, Distribution::uniform, 200, 8}), row_grid()));
  const double length =
      mean_width(ensemble_pattern(sample_configs(base, {0.0, mm(0.1), 0.0, Distribution::uniform, 200, 8}), row_grid()));
  auto misaligned = base;
  misaligned.gaps.back().length += mm(0.1);
  const double gap = mean_width(pattern(misaligned, row_grid()));
  CHECK(angle - ideal > length - ideal);
  CHECK(angle - ideal > gap - ideal);
}

TEST_CASE("last-gap misalignment hurts visibility mainly at large angles") {
  const auto base = uniform_lattice(kPump, 5, mm(1), mm(8.2));
  auto misaligned = base;
  misaligned.gaps.back().length += mm(0.1);
  const auto ideal = cross_section(ensemble_pattern({base}, row_grid()), nm(610.4), 0.0);
  const auto perturbed = cross_section(ensemble_pattern({misaligned}, row_grid()), nm(610.4), 0.0);
  const double inner_ideal = visibility(ideal, 0.0, deg(0.3));
  const double inner = visibility(perturbed, 0.0, deg(0.3));
  const double outer_ideal = visibility(ideal, deg(0.75), deg(0.85));
  const double outer = visibility(perturbed, deg(0.75), deg(0.85));
  CHECK((inner_ideal - inner) / inner_ideal < 0.05);
  CHECK(outer_ideal - outer > 3.0 * (inner_ideal - inner));
}

TEST_CASE("symmetric ensembles are θ-even") {
  const auto base = uniform_lattice(kPump, 5, mm(1), mm(8.2));
  const auto grid = GridAxes::uniform(nm(610.2), nm(610.6), 3, kDefaultMaxAngle, 301);
  const auto p = ensemble_pattern(sample_configs(base, {deg(0.02), mm(0.1), mm(0.1), Distribution::uniform, 16, 5}), grid);
  const std::size_t cols = p.columns();
  for (std::size_t r = 0; r < p.rows(); ++r) {
    for (std::size_t c = 0; c < cols / 2; ++c) CHECK(std::abs(p.at(r, c) - p.at(r, cols - 1 - c)) < 1e-10);
  }
}
