#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <vector>

#include "asmc/error.hpp"
#include "asmc/landscape.hpp"
#include "asmc/smc.hpp"

using namespace asmc;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("log weight examples") {
  const auto u = make_potential("quartic");
  CHECK(log_weight(*u, 0.5, 1.0 / 3.0, Point{1.0}) == 0.0);
  CHECK(log_weight(*u, 0.5, 1.0 / 3.0, Point{0.0}) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(log_weight(*u, 0.3, 0.5, Point{0.0}), InvalidArgument);
  CHECK_THROWS_AS(log_weight(*u, 0.0, 0.0, Point{0.0}), InvalidArgument);
}

TEST_CASE("effective sample size") {
  const std::vector<double> equal(7, -3.0);
  CHECK(effective_sample_size(equal) == doctest::Approx(7.0));
  const std::vector<double> one{0.0, -kInf, -kInf};
  CHECK(effective_sample_size(one) == doctest::Approx(1.0));
  const std::vector<double> two{std::log(0.8), std::log(0.2)};
  CHECK(effective_sample_size(two) == doctest::Approx(1.0 / 0.68));
}

TEST_CASE("normalized weights") {
  const std::vector<double> lw{1000.0, 1000.0 + std::log(3.0)};
  const auto w = normalized_weights(lw);
  CHECK(w[0] == doctest::Approx(0.25));
  CHECK(w[1] == doctest::Approx(0.75));
  const std::vector<double> dead{-kInf, -kInf};
  CHECK_THROWS_AS(normalized_weights(dead), WeightCollapse);
  const std::vector<double> nan{0.0, std::nan("")};
  CHECK_THROWS_AS(normalized_weights(nan), WeightCollapse);
}

TEST_CASE("multinomial selection frequencies") {
  StreamRng rng({1, 1, kResampleStream});
  SUBCASE("uniform") {
    const std::vector<double> lw(4, 0.0);
    const auto idx = multinomial_indices(lw, 100000, rng);
    const auto counts = offspring_counts(idx, 4);
    for (auto c : counts) CHECK(std::abs(double(c) - 25000.0) < 3.0 * std::sqrt(100000 * 0.25 * 0.75));
  }
  SUBCASE("degenerate") {
    const std::vector<double> lw{0.0, -kInf, -kInf};
    const auto idx = multinomial_indices(lw, 50, rng);
    for (auto i : idx) CHECK(i == 0);
  }
  SUBCASE("0.5 / 0.3 / 0.2") {
    const std::vector<double> p{0.5, 0.3, 0.2};
    std::vector<double> lw;
    for (double v : p) lw.push_back(std::log(v) - 4.0);
    const std::size_t n = 100000;
    const auto counts = offspring_counts(multinomial_indices(lw, n, rng), 3);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std::abs(double(counts[j]) - n * p[j]) < 3.0 * std::sqrt(n * p[j] * (1 - p[j])));
    }
  }
}

TEST_CASE("systematic resampling keeps counts within one of N w") {
  StreamRng rng({2, 1, kResampleStream});
  const std::vector<double> p{0.1, 0.45, 0.05, 0.4};
  std::vector<double> lw;
  for (double v : p) lw.push_back(std::log(v));
  for (int rep = 0; rep < 50; ++rep) {
    const auto counts = offspring_counts(systematic_indices(lw, 20, rng), 4);
    for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(double(counts[j]) - 20 * p[j]) < 1.0 + 1e-12);
  }
}

TEST_CASE("resampling is conditionally unbiased") {
  // fixed 5-particle ensemble; E[mean h after resampling] = sum h w / sum w
  ParticleEnsemble e(1, {-1.2, -0.3, 0.1, 0.8, 1.5});
  e.log_weights = {-0.4, -2.0, 0.3, -1.1, 0.0};
  const auto w = normalized_weights(e.log_weights);
  auto h = [](double x) { return std::tanh(2 * x) + 0.5 * x * x; };
  double exact = 0.0, second = 0.0;
  for (std::size_t j = 0; j < 5; ++j) {
    exact += w[j] * h(e.positions[j]);
    second += w[j] * h(e.positions[j]) * h(e.positions[j]);
  }
  const double var_mean = (second - exact * exact) / 5.0;
  const std::size_t draws = 100000;
  double acc = 0.0;
  std::vector<std::size_t> counts(5, 0);
  for (std::size_t r = 0; r < draws; ++r) {
    StreamRng rng({123, static_cast<std::uint32_t>(r), kResampleStream});
    std::vector<std::size_t> off;
    const auto out = resample_multinomial(e, rng, &off);
    double m = 0.0;
    for (double x : out.positions) m += h(x);
    acc += m / 5.0;
    for (std::size_t j = 0; j < 5; ++j) counts[j] += off[j];
    CHECK(std::accumulate(off.begin(), off.end(), std::size_t{0}) == 5);
    if (r == 0) {
      for (double lw : out.log_weights) CHECK(lw == 0.0);
    }
  }
  CHECK(std::abs(acc / draws - exact) < 3.0 * std::sqrt(var_mean / draws));
  const double total = 5.0 * draws;
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(std::abs(counts[j] - total * w[j]) < 3.0 * std::sqrt(total * w[j] * (1 - w[j])));
  }
}

TEST_CASE("resampler and init names") {
  CHECK(parse_resampler("multinomial") == Resampler::kMultinomial);
  CHECK(parse_resampler("systematic") == Resampler::kSystematic);
  CHECK_THROWS(parse_resampler("residual"));
  CHECK(parse_init("cube") == InitKind::kCube);
  CHECK(to_string(InitKind::kOrigin) == "origin");
}

TEST_CASE("initial points") {
  const auto cube = initial_points(InitKind::kCube, 3, 1000, 5);
  REQUIRE(cube.size() == 3000);
  for (double v : cube) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
  CHECK(initial_points(InitKind::kCube, 3, 1000, 5) == cube);
  for (double v : initial_points(InitKind::kOrigin, 2, 10, 5)) CHECK(v == 0.0);
}

namespace {

AsmcResult small_run(std::uint64_t seed, kernels::Execution exec, const LandscapeSummary* ls = nullptr) {
  const auto u = make_potential("quartic");
  const auto s = build_schedule(0.1, 6);
  AsmcOptions o;
  o.seed = seed;
  o.execution = exec;
  o.landscape = ls;
  const auto init = initial_points(InitKind::kCube, 1, 500, seed);
  return run_asmc(*u, s, 500, 0.5, init, o);
}

}  // namespace

TEST_CASE("run_asmc is reproducible and thread-count invariant") {
  const auto ls = landscape_summary(make_potential("quartic"), 1.0);
  const auto a = small_run(8, kernels::Execution::kSerial, &ls);
  kernels::set_thread_limit(3);
  const auto b = small_run(8, kernels::Execution::kParallel, &ls);
  kernels::set_thread_limit(0);
  REQUIRE(a.samples.size() == b.samples.size());
  CHECK(std::memcmp(a.samples.data(), b.samples.data(), a.samples.size() * sizeof(double)) == 0);
  REQUIRE(a.trace.levels.size() == 6);
  for (std::size_t k = 0; k < 6; ++k) {
    const auto& ra = a.trace.levels[k];
    const auto& rb = b.trace.levels[k];
    CHECK(ra.level == k + 1);
    CHECK(ra.ess == rb.ess);
    CHECK(ra.basin_fraction == rb.basin_fraction);
    CHECK(ra.offspring_histogram == rb.offspring_histogram);
    CHECK(std::accumulate(ra.basin_fraction.begin(), ra.basin_fraction.end(), 0.0) == doctest::Approx(1.0));
    if (k + 1 < 6) {
      std::size_t parents = 0, children = 0;
      for (std::size_t c = 0; c < ra.offspring_histogram.size(); ++c) {
        parents += ra.offspring_histogram[c];
        children += c * ra.offspring_histogram[c];
      }
      CHECK(parents == 500);
      CHECK(children == 500);
      CHECK(ra.resample_max_count == ra.offspring_histogram.size() - 1);
    } else {
      CHECK(ra.ess == 500.0);
    }
  }
  CHECK(a.steps == doctest::Approx(6.0 * 500 * 50));
  const auto c = small_run(9, kernels::Execution::kParallel);
  CHECK(c.samples != a.samples);
}

TEST_CASE("one level is plain Langevin at eta") {
  const auto u = make_potential("quartic");
  const auto s = build_schedule(0.2, 1);
  const auto init = initial_points(InitKind::kCube, 1, 200, 4);
  AsmcOptions o;
  o.seed = 4;
  const auto r = run_asmc(*u, s, 200, 1.0, init, o);
  LangevinParams p;
  p.temperature = 0.2;
  p.total_time = 1.0;
  for (std::size_t i = 0; i < 200; ++i) {
    const Point x = simulate(Point{init[i]}, *u, p, {4, 1, static_cast<std::uint32_t>(i)});
    CHECK(x[0] == r.samples[i]);
  }
}

TEST_CASE("run_asmc preconditions") {
  const auto u = make_potential("quartic");
  const auto s = build_schedule(0.1, 4);
  AsmcOptions o;
  std::vector<double> init(100, 3.0);  // U(3) = 64
  o.c_ini = 10.0;
  CHECK_THROWS_AS(run_asmc(*u, s, 100, 0.5, init, o), InvalidArgument);
  o.c_ini = kInf;
  o.budget_cap = 1000;
  std::vector<double> ok(100, 0.0);
  CHECK_THROWS_AS(run_asmc(*u, s, 100, 0.5, ok, o), BudgetExceeded);
  o.budget_cap = kInf;
  CHECK_THROWS_AS(run_asmc(*u, s, 99, 0.5, ok, o), Error);
}

TEST_CASE("in-K fraction grows as the temperature falls") {
  const auto ls = landscape_summary(make_potential("quartic"), 1.0);
  const auto r = small_run(2, kernels::Execution::kParallel, &ls);
  CHECK(r.trace.levels.back().in_k_fraction > r.trace.levels.front().in_k_fraction);
  CHECK(r.trace.levels.back().in_k_fraction > 0.95);
}

TEST_CASE("max normalized weight improves as nu decreases") {
  // smaller nu means more levels and smaller inverse-temperature increments
  const auto u = make_potential("quartic");
  const auto init = initial_points(InitKind::kCube, 1, 2000, 1);
  double prev = kInf;
  for (double nu : {2.0, 1.0, 0.5, 0.25}) {
    const auto m = static_cast<std::size_t>(std::ceil(1.0 / (nu * 0.1)));
    const auto s = build_schedule(0.1, m);
    AsmcOptions o;
    o.seed = 1;
    double worst = 0.0;
    o.on_level = [&](const LevelRecord& rec) {
      if (rec.level < m) worst = std::max(worst, 2000.0 / rec.ess);
    };
    run_asmc(*u, s, 2000, 0.5, init, o);
    CAPTURE(nu);
    CHECK(worst < prev);
    prev = worst;
  }
}
