#include <doctest.h>

#include <cmath>
#include <vector>

#include "asmc/error.hpp"
#include "asmc/landscape.hpp"
#include "asmc/potential.hpp"
#include "asmc/rng.hpp"

using namespace asmc;

namespace {

std::vector<PotentialPtr> all_builtins() {
  return {make_potential("quartic"),
          make_potential("tilted_quartic"),
          make_potential("double_well_2d"),
          make_potential("gaussian_mixture"),
          make_potential("gaussian_mixture", {{"dim", 2}}),
          make_potential("gaussian_mixture", {{"dim", 3}, {"sigma2", 0.8}, {"weight", 0.4}}),
          make_potential("triple_well"),
          make_potential("quadratic", {{"dim", 2}, {"omega", 3.0}})};
}

Point random_point(StreamRng& rng, std::size_t d, double r) {
  Point x(d);
  for (auto& v : x) v = r * (2.0 * rng.uniform() - 1.0);
  return x;
}

}  // namespace

TEST_CASE("quartic values and gradient") {
  const auto u = make_potential("quartic");
  CHECK(u->energy(Point{1.0}) == doctest::Approx(0.0));
  CHECK(u->energy(Point{0.0}) == doctest::Approx(1.0));
  CHECK(u->gradient(Point{0.0})[0] == doctest::Approx(0.0));
  CHECK(u->gradient(Point{1.0})[0] == doctest::Approx(0.0));
  CHECK(u->gradient(Point{0.5})[0] == doctest::Approx(-1.5));
  const double h = 1e-6;
  const double fd = (u->energy(Point{0.5 + h}) - u->energy(Point{0.5 - h})) / (2 * h);
  CHECK(fd == doctest::Approx(-1.5).epsilon(1e-8));
}

TEST_CASE("dimension mismatch") {
  const auto u = make_potential("quartic");
  CHECK_THROWS_AS(u->energy(Point{1.0, 2.0}), DimensionMismatch);
  CHECK_THROWS_AS(u->gradient(Point{}), DimensionMismatch);
}

TEST_CASE("unknown id names the valid ones") {
  try {
    make_potential("unknown");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("quartic") != std::string::npos);
    CHECK(msg.find("triple_well") != std::string::npos);
  }
  CHECK_THROWS_AS(make_potential("quartic", {{"bogus", 1.0}}), ConfigError);
}

TEST_CASE("normalization and critical minima for every built-in") {
  for (const auto& u : all_builtins()) {
    CAPTURE(u->id());
    const auto& mins = u->minima();
    REQUIRE(!mins.empty());
    CHECK(u->energy(mins[0].location) == doctest::Approx(0.0).epsilon(1e-12));
    for (std::size_t i = 0; i < mins.size(); ++i) {
      CHECK(u->energy(mins[i].location) == doctest::Approx(mins[i].energy).epsilon(1e-12));
      if (i > 0) CHECK(mins[i].energy >= mins[i - 1].energy);
      for (double g : u->gradient(mins[i].location)) CHECK(std::abs(g) < 1e-8);
    }
  }
}

TEST_CASE("finite-difference gradient on random probes") {
  StreamRng rng({99, 0, 0});
  for (const auto& u : all_builtins()) {
    CAPTURE(u->id());
    const std::size_t d = u->dimension();
    for (int probe = 0; probe < 1000; ++probe) {
      const Point x = random_point(rng, d, 2.0);
      const Point g = u->gradient(x);
      for (std::size_t j = 0; j < d; ++j) {
        Point xp = x, xm = x;
        const double h = 1e-5 * std::max(1.0, std::abs(x[j]));
        xp[j] += h;
        xm[j] -= h;
        const double fd = (u->energy(xp) - u->energy(xm)) / (2 * h);
        CHECK(std::abs(fd - g[j]) <= 1e-6 * (1.0 + std::abs(g[j])));
      }
    }
  }
}

TEST_CASE("basin classification") {
  const auto u = make_potential("quartic");
  // minima ordered by energy; ties keep declaration order (-1 then +1)
  const auto idx_plus = u->minima()[0].location[0] > 0 ? 0u : 1u;
  CHECK(classify_basin(*u, Point{0.5}).index == idx_plus);
  CHECK(classify_basin(*u, Point{-0.5}).index == 1u - idx_plus);
  CHECK(classify_basin(*u, u->minima()[1].location).index == 1u);
  CHECK(classify_basin(*u, u->minima()[0].location).index == 0u);

  const auto saddle = classify_basin(*u, Point{0.0});
  CHECK(saddle.on_separatrix);
  CHECK(saddle.index == 0u);
}

TEST_CASE("classify_basin is idempotent and mirror symmetric") {
  const auto u = make_potential("quartic");
  StreamRng rng({5, 0, 0});
  for (int probe = 0; probe < 200; ++probe) {
    const Point x = random_point(rng, 1, 2.0);
    if (std::abs(x[0]) < 1e-6) continue;
    const auto r = classify_basin(*u, x);
    CHECK(classify_basin(*u, r.endpoint).index == r.index);
    const auto m = classify_basin(*u, Point{-x[0]});
    CHECK(m.index == 1u - r.index);
  }
  const auto w = make_potential("double_well_2d");
  for (int probe = 0; probe < 100; ++probe) {
    const Point x = random_point(rng, 2, 2.0);
    const auto r = classify_basin(*w, x);
    CHECK(classify_basin(*w, r.endpoint).index == r.index);
    CHECK(r.index == *w->analytic_basin(x));
  }
}

TEST_CASE("quartic landscape") {
  const auto ls = landscape_summary(make_potential("quartic"), 1.0);
  CHECK(ls.saddle_height == doctest::Approx(1.0));
  CHECK(ls.energy_barrier == doctest::Approx(1.0));
  CHECK(ls.barrier_ratio == doctest::Approx(1.0));
  CHECK(ls.c_k == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(ls.b_threshold == doctest::Approx(std::pow(2.0, -0.25)));
  CHECK(ls.primary_saddle.location[0] == doctest::Approx(0.0).epsilon(1e-9));
  const auto& m = ls.potential->minima();
  CHECK(m[0].energy == doctest::Approx(m[1].energy));
}

TEST_CASE("tilted quartic landscape") {
  const auto u = make_potential("quartic", {{"tilt", 0.1}});
  const auto ls = landscape_summary(u, 1.0);
  CHECK(ls.energy_barrier < ls.saddle_height);
  CHECK(ls.barrier_ratio > 1.0);
  CHECK(ls.saddle_height == doctest::Approx(u->energy(ls.primary_saddle.location)));
  CHECK(ls.energy_barrier ==
        doctest::Approx(u->energy(ls.primary_saddle.location) - u->minima()[1].energy));
  // the tilt raises the right well
  CHECK(u->minima()[0].location[0] < 0.0);
}

TEST_CASE("landscape invariants over built-ins") {
  StreamRng rng({3, 0, 0});
  for (const auto& u : all_builtins()) {
    if (u->minima().size() < 2) continue;
    CAPTURE(u->id());
    for (double alpha : {0.5, 1.0, 3.0}) {
      const auto ls = landscape_summary(u, alpha);
      CHECK(ls.energy_barrier <= ls.saddle_height + 1e-12);
      CHECK(ls.barrier_ratio >= 1.0 - 1e-12);
      for (int probe = 0; probe < 1000; ++probe) {
        const Point x = random_point(rng, u->dimension(), 2.5);
        const auto basin = ls.basin_of(x);
        const auto b = ls.b_index(x);
        for (std::size_t i = 0; i < u->minima().size(); ++i) {
          if (ls.in_b(i, x)) {
            CHECK(ls.in_k(x));
            CHECK(i == basin);
          }
        }
        if (u->energy(x) > ls.saddle_height) CHECK_FALSE(b.has_value());
      }
    }
  }
}

TEST_CASE("triple well has two saddles and equal outer wells") {
  const auto u = make_potential("triple_well");
  REQUIRE(u->minima().size() == 3);
  const auto ls = landscape_summary(u, 1.0);
  CHECK(ls.saddles.size() == 2);
  CHECK(u->minima()[1].energy == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(u->minima()[2].energy == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("landscape preconditions") {
  CHECK_THROWS_AS(landscape_summary(make_potential("quartic"), 0.0), InvalidArgument);
  CHECK_THROWS(landscape_summary(make_potential("quadratic"), 1.0));
}

TEST_CASE("sublevel box contains the sublevel set") {
  for (const auto& u : all_builtins()) {
    CAPTURE(u->id());
    const Box box = sublevel_box(*u, 5.0);
    StreamRng rng({1, 0, 0});
    for (int probe = 0; probe < 500; ++probe) {
      Point x = random_point(rng, u->dimension(), 4.0);
      bool inside = true;
      for (std::size_t j = 0; j < x.size(); ++j) inside = inside && x[j] >= box.lo[j] && x[j] <= box.hi[j];
      if (!inside) CHECK(u->energy(x) > 5.0 - 1e-9);
    }
  }
}
