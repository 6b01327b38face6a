#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "asmc/diagnostics.hpp"
#include "asmc/error.hpp"
#include "asmc/oracle.hpp"

using namespace asmc;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("Simpson weights") {
  const auto w = simpson_weights(5, 0.5);
  CHECK(w == std::vector<double>{0.5 / 3, 2.0 / 3, 1.0 / 3, 2.0 / 3, 0.5 / 3});
  CHECK_THROWS(simpson_weights(4, 0.5));
}

TEST_CASE("Gaussian partition function") {
  const auto u = make_potential("quadratic");
  CHECK(grid_partition_function(*u, 1.0).value == doctest::Approx(std::sqrt(2 * kPi)).epsilon(1e-6));
  for (double eps : {1.0, 0.5, 0.1}) {
    CHECK(grid_partition_function(*u, eps).value / std::sqrt(eps) == doctest::Approx(std::sqrt(2 * kPi)).epsilon(1e-6));
  }
  const auto u2 = make_potential("quadratic", {{"dim", 2}, {"omega", 2.0}});
  CHECK(grid_partition_function(*u2, 0.5).value == doctest::Approx(2 * kPi * 0.5 / 2.0).epsilon(1e-6));
}

TEST_CASE("quartic Z against the Laplace asymptotic") {
  const auto u = make_potential("quartic");
  const double z = grid_partition_function(*u, 0.05).value;
  const double lap = laplace_asymptotic_z(*u, 0.05);
  CHECK(lap == doctest::Approx(2 * std::sqrt(2 * kPi * 0.05 / 8.0)));
  CHECK(std::abs(z / lap - 1.0) < 0.1);
}

TEST_CASE("grid expectations on the symmetric quartic") {
  const auto u = make_potential("quartic");
  const auto ls = landscape_summary(u, 1.0);
  for (double eps : {0.3, 0.1, 0.05}) {
    CHECK(grid_expectation(*u, eps, [](std::span<const double>) { return 1.0; }).value == doctest::Approx(1.0));
    CHECK(std::abs(grid_expectation(*u, eps, [](std::span<const double> x) { return x[0]; }).value) < 1e-10);
    const auto ind = basin_indicator(ls, 0);
    CHECK(grid_expectation(*u, eps, ind.h).value == doctest::Approx(0.5).epsilon(1e-4));
    const auto wm = well_masses(ls, eps);
    CHECK(wm.masses[0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(wm.masses[1] == doctest::Approx(0.5).epsilon(1e-10));
  }
}

TEST_CASE("Gibbs reference invariants") {
  for (std::string id : {"quartic", "tilted_quartic", "triple_well", "double_well_2d"}) {
    CAPTURE(id);
    const auto ls = landscape_summary(make_potential(id), 1.0);
    const auto ref = gibbs_reference(ls, 0.1, {}, 129);
    double sum = 0.0;
    for (double m : ref.well_masses) {
      CHECK(m >= 0.0);
      sum += m;
    }
    CHECK(sum <= 1.0 + 1e-9);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    // normalized density integrates to one on its grid
    const std::size_t d = ls.potential->dimension();
    std::vector<std::vector<double>> w(d);
    for (std::size_t j = 0; j < d; ++j) w[j] = simpson_weights(ref.nodes, (ref.box.hi[j] - ref.box.lo[j]) / (ref.nodes - 1));
    double integral = 0.0;
    for (std::size_t idx = 0; idx < ref.density.size(); ++idx) {
      double wt = 1.0;
      std::size_t rest = idx;
      for (std::size_t j = d; j-- > 0;) {
        wt *= w[j][rest % ref.nodes];
        rest /= ref.nodes;
      }
      integral += wt * ref.density[idx];
    }
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(ref.c_m == doctest::Approx(1.0 / std::sqrt(*std::min_element(ref.well_masses.begin(), ref.well_masses.end()))));
  }
}

TEST_CASE("quadrature self-consistency under refinement") {
  const auto ls = landscape_summary(make_potential("tilted_quartic"), 1.0);
  QuadratureOptions coarse;
  coarse.rel_tol = 1e-7;
  QuadratureOptions fine = coarse;
  fine.min_level = 10;
  const auto a = gibbs_reference(ls, 0.05, coarse, 3);
  const auto b = gibbs_reference(ls, 0.05, fine, 3);
  CHECK(std::abs(a.z / b.z - 1.0) < 1e-5);
  for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(a.well_masses[i] - b.well_masses[i]) < 1e-5);
  CHECK(a.refinement_change < 1e-5);
}

TEST_CASE("tilted quartic masses at two resolutions") {
  const auto ls = landscape_summary(make_potential("tilted_quartic"), 1.0);
  QuadratureOptions lo;
  lo.min_level = 7;
  QuadratureOptions hi;
  hi.min_level = 12;
  const auto a = well_masses(ls, 0.1, lo);
  const auto b = well_masses(ls, 0.1, hi);
  CHECK(std::abs(a.masses[0] - b.masses[0]) < 1e-4);
  CHECK(a.masses[0] > 0.5);
  // a plain tensor grid with basin classification agrees too
  const auto ind = basin_indicator(ls, 0);
  QuadratureOptions grid;
  grid.rel_tol = 1e-7;
  CHECK(std::abs(grid_expectation(*ls.potential, 0.1, ind.h, grid).value - b.masses[0]) < 1e-4);
}

TEST_CASE("mass outside K decays at rate C_K") {
  const auto ls = landscape_summary(make_potential("quartic"), 1.0);
  for (double eps : {0.1, 0.05}) {
    const auto wm = well_masses(ls, eps);
    CHECK(-eps * std::log(wm.outside_k) >= 0.75 * ls.c_k);
  }
}

TEST_CASE("OU spectrum") {
  const auto u = make_potential("quadratic");
  for (double eps : {1.0, 0.5, 0.1}) {
    const auto s = spectral_solve(*u, eps);
    REQUIRE(s.eigenvalues.size() == 4);
    CHECK(std::abs(s.eigenvalues[0]) < 1e-10);
    for (int k = 1; k < 4; ++k) CHECK(std::abs(s.eigenvalues[k] - k) < 0.01 * k);
  }
  const auto u2 = make_potential("quadratic", {{"dim", 2}});
  const auto s2 = spectral_solve(*u2, 0.5, {61, 4});
  CHECK(std::abs(s2.eigenvalues[1] - 1.0) < 0.03);
  CHECK(std::abs(s2.eigenvalues[2] - 1.0) < 0.03);
  CHECK(std::abs(s2.eigenvalues[3] - 2.0) < 0.06);
}

TEST_CASE("spectral invariants") {
  const auto ls = landscape_summary(make_potential("quartic"), 1.0);
  for (double eps : {0.2, 0.1, 0.06}) {
    CAPTURE(eps);
    const auto s = spectral_solve(*ls.potential, eps, {}, &ls);
    CHECK(std::abs(s.eigenvalues[0]) <= 1e-10);
    for (std::size_t k = 1; k < s.eigenvalues.size(); ++k) CHECK(s.eigenvalues[k] >= s.eigenvalues[k - 1]);
    for (double v : s.eigenfunctions[0]) CHECK(v == doctest::Approx(1.0));
    double total = 0.0;
    for (double m : s.cell_mass) total += m;
    CHECK(total == doctest::Approx(1.0));
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        double ip = 0.0;
        for (std::size_t c = 0; c < s.cell_mass.size(); ++c) ip += s.eigenfunctions[i][c] * s.eigenfunctions[j][c] * s.cell_mass[c];
        CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-6);
      }
    }
    CHECK(s.boundary_mass <= 1e-10);
    // sign: positive at the global minimum
    const double x1 = ls.potential->minima()[0].location[0];
    std::size_t near = 0;
    for (std::size_t c = 0; c < s.points.size(); ++c)
      if (std::abs(s.points[c] - x1) < std::abs(s.points[near] - x1)) near = c;
    CHECK(s.psi2()[near] > 0.0);
    REQUIRE(s.coefficients.size() == 2);
    CHECK(s.coefficients[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(s.coefficients[1] == doctest::Approx(-1.0).epsilon(1e-6));
  }
}

TEST_CASE("Arrhenius slope and spectral gap on the quartic") {
  const auto ls = landscape_summary(make_potential("quartic"), 1.0);
  std::vector<double> x, y;
  double max_l2 = 0.0, l3_small = 0.0;
  for (double eps : {0.14, 0.12, 0.1, 0.08, 0.06}) {
    const auto s = spectral_solve(*ls.potential, eps, {}, &ls);
    x.push_back(-1.0 / eps);
    y.push_back(std::log(s.eigenvalues[1]));
    max_l2 = std::max(max_l2, s.eigenvalues[1]);
    l3_small = s.eigenvalues[2];
  }
  const double slope = fit_slope(x, y);
  CHECK(std::abs(slope - ls.energy_barrier) <= 0.15 * ls.energy_barrier);
  CHECK(l3_small > 10.0 * max_l2);
}

TEST_CASE("eigenfunction flatness and C_psi") {
  const auto ls = landscape_summary(make_potential("quartic"), 1.0);
  const auto s10 = spectral_solve(*ls.potential, 0.1, {}, &ls);
  const auto s06 = spectral_solve(*ls.potential, 0.06, {}, &ls);
  CHECK(eigenfunction_flatness(s06, ls) < eigenfunction_flatness(s10, ls));
  double lo = 1e300, hi = 0.0;
  for (double eps : {0.2, 0.15, 0.1, 0.08, 0.06}) {
    const auto s = spectral_solve(*ls.potential, eps, {}, &ls);
    lo = std::min(lo, s.c_psi);
    hi = std::max(hi, s.c_psi);
  }
  CHECK(hi < 2.0 * lo);
}

TEST_CASE("triple well has two small eigenvalues below the gap") {
  const auto ls = landscape_summary(make_potential("triple_well"), 1.0);
  const auto s = spectral_solve(*ls.potential, 0.1, {0, 5}, &ls);
  CHECK(s.wells == 3);
  std::size_t small = 0;
  for (std::size_t k = 1; k < s.eigenvalues.size(); ++k)
    if (s.eigenvalues[k] < 0.01 * s.gap) ++small;
  CHECK(small == 2);
  CHECK(s.gap == doctest::Approx(s.eigenvalues[3]));
}

TEST_CASE("2-d double well spectrum") {
  const auto ls = landscape_summary(make_potential("double_well_2d"), 1.0);
  const auto s = spectral_solve(*ls.potential, 0.2, {}, &ls);
  CHECK(s.eigenvalues[1] > 0.0);
  CHECK(s.eigenvalues[2] > 10 * s.eigenvalues[1]);
  CHECK(s.basin_mass[0] == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("KDE basics") {
  const std::vector<double> pts{0.0};
  const std::vector<double> bw{0.5};
  const std::vector<double> at{0.0};
  CHECK(gaussian_kde(pts, 1, at, bw) == doctest::Approx(1.0 / (0.5 * std::sqrt(2 * kPi))));
  const std::vector<double> zero{0.0};
  CHECK_THROWS_AS(gaussian_kde(pts, 1, at, zero), InvalidArgument);
  std::vector<double> many;
  for (int i = 0; i < 1000; ++i) many.push_back(i % 2 ? 1.0 : -1.0);
  CHECK(silverman_bandwidth(many, 1)[0] == doctest::Approx(1.0005 * std::pow(4.0 / 3000.0, 0.2)).epsilon(1e-3));
}

TEST_CASE("OU transition density on the diagonal") {
  const auto u = make_potential("quadratic");
  const double eps = 0.5, t = 0.5, x = 0.7;
  TransitionOptions o;
  o.n_runs = 20000;
  o.dt = 1e-3;
  o.seed = 3;
  const std::vector<double> at{x};
  const auto est = transition_density_diagonal(*u, eps, t, at, o);
  const double var = eps * (1 - std::exp(-2 * t));
  const double mean = x * std::exp(-t);
  const double h = est.bandwidth[0];
  // exact law convolved with the kernel, and the unsmoothed value
  const double smoothed = std::exp(-(x - mean) * (x - mean) / (2 * (var + h * h))) / std::sqrt(2 * kPi * (var + h * h));
  const double exact = std::exp(-(x - mean) * (x - mean) / (2 * var)) / std::sqrt(2 * kPi * var);
  CHECK(std::abs(est.density / smoothed - 1.0) < 0.05);
  CHECK(std::abs(est.density / exact - 1.0) < 0.05);
  CHECK(est.density >= 0.0);
  CHECK(est.pi_x == doctest::Approx(std::exp(-x * x / (2 * eps)) / std::sqrt(2 * kPi * eps)));
}

TEST_CASE("sweep matches independent estimates in distribution") {
  const auto u = make_potential("quadratic");
  TransitionOptions o;
  o.n_runs = 10000;
  o.seed = 2;
  const std::vector<double> at{0.0};
  const std::vector<double> times{0.2, 1.0, 6.0};
  const auto sweep = transition_density_sweep(*u, 1.0, times, at, o);
  REQUIRE(sweep.size() == 3);
  CHECK(sweep[0].ratio > sweep[1].ratio);
  CHECK(sweep[1].ratio > sweep[2].ratio);
  CHECK(std::abs(sweep[2].ratio - 1.0) < 0.1);
  const std::vector<double> bad{1.0, 0.5};
  CHECK_THROWS_AS(transition_density_sweep(*u, 1.0, bad, at, o), InvalidArgument);
}
