#include <doctest.h>

#include <cmath>
#include <vector>

#include "asmc/dynamics.hpp"
#include "asmc/error.hpp"
#include "asmc/kernels.hpp"
#include "asmc/potential.hpp"

using namespace asmc;

TEST_CASE("langevin_step examples") {
  const auto quartic = make_potential("quartic");
  const Point zero{0.0};
  const Point xmin = quartic->minima()[0].location;
  CHECK(langevin_step(*quartic, xmin, 0.3, 0.01, zero) == xmin);

  const auto quad = make_potential("quadratic");
  CHECK(langevin_step(*quad, Point{1.0}, 1.0, 0.1, zero)[0] == doctest::Approx(0.9));

  Point x{0.5};
  for (int i = 0; i < 2000; ++i) x = langevin_step(*quartic, x, 0.0, 0.01, zero);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("langevin_step validates") {
  const auto quad = make_potential("quadratic");
  CHECK_THROWS_AS(langevin_step(*quad, Point{1.0, 2.0}, 1.0, 0.1, Point{0.0}), DimensionMismatch);
}

TEST_CASE("simulate: T = 0 and reproducibility") {
  const auto quartic = make_potential("quartic");
  LangevinParams p;
  p.temperature = 0.2;
  p.total_time = 0.0;
  const Point x0{0.3};
  CHECK(simulate(x0, *quartic, p, {1, 2, 3}) == x0);

  p.total_time = 1.0;
  const Point a = simulate(x0, *quartic, p, {1, 2, 3});
  const Point b = simulate(x0, *quartic, p, {1, 2, 3});
  const Point c = simulate(x0, *quartic, p, {1, 2, 4});
  CHECK(a[0] == b[0]);
  CHECK(a[0] != c[0]);
}

TEST_CASE("step count includes a final partial step") {
  LangevinParams p;
  p.total_time = 1.005;
  p.dt = 0.01;
  CHECK(p.step_count() == 101);
  p.total_time = 1.0;
  CHECK(p.step_count() == 100);
  p.total_time = 0.001;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p.total_time = 1.0;
  p.temperature = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("divergence guard") {
  const auto quartic = make_potential("quartic");
  LangevinParams p;
  p.temperature = 0.1;
  p.total_time = 5.0;
  p.dt = 1.0;
  CHECK_THROWS_AS(simulate(Point{3.0}, *quartic, p, {1, 0, 0}), Divergence);
}

namespace {

// Empirical second moment of n OU endpoints; the Euler scheme's stationary
// variance is eps / (omega (1 - omega dt / 2)).
struct Moment {
  double mean = 0.0;
  double second = 0.0;
  double se = 0.0;
};

Moment ou_moment(double eps, double omega, double dt, std::size_t n, std::uint64_t seed) {
  const auto u = make_potential("quadratic", {{"omega", omega}});
  LangevinParams p;
  p.temperature = eps;
  p.total_time = 8.0 / omega;
  p.dt = dt;
  std::vector<double> x(n, 0.0);
  kernels::propagate(kernels::Execution::kParallel, *u, x, p, seed, 1);
  Moment m;
  double s4 = 0.0;
  for (double v : x) {
    m.mean += v;
    m.second += v * v;
    s4 += v * v * v * v;
  }
  m.mean /= n;
  m.second /= n;
  m.se = std::sqrt((s4 / n - m.second * m.second) / n);
  return m;
}

}  // namespace

TEST_CASE("OU stationary variance over 1e5 runs") {
  const double eps = 0.5, omega = 2.0, dt = 0.01;
  const auto m = ou_moment(eps, omega, dt, 100000, 17);
  const double exact = eps / omega;
  const double bias = exact * omega * dt;  // O(dt) bound on the Euler bias
  CHECK(std::abs(m.second - exact) <= 3.0 * m.se + bias);
  CHECK(std::abs(m.mean) < 4.0 * std::sqrt(exact / 100000));
}

TEST_CASE("halving dt leaves ensemble statistics within error") {
  const auto a = ou_moment(0.5, 2.0, 0.02, 50000, 5);
  const auto b = ou_moment(0.5, 2.0, 0.01, 50000, 5);
  const double bias = 0.25 * 2.0 * 0.02;
  CHECK(std::abs(a.second - b.second) <= 3.0 * std::hypot(a.se, b.se) + bias);
}

TEST_CASE("MALA removes the stationary bias") {
  const auto u = make_potential("quadratic");
  LangevinParams p;
  p.temperature = 1.0;
  p.total_time = 10.0;
  p.dt = 0.2;
  p.integrator = Integrator::kMala;
  const std::size_t n = 40000;
  std::vector<double> x(n, 0.0);
  kernels::propagate(kernels::Execution::kParallel, *u, x, p, 9, 1);
  double s2 = 0, s4 = 0;
  for (double v : x) {
    s2 += v * v;
    s4 += v * v * v * v;
  }
  s2 /= n;
  const double se = std::sqrt((s4 / n - s2 * s2) / n);
  CHECK(std::abs(s2 - 1.0) < 4.0 * se);
  // ULA at this step is visibly biased: 1 / (1 - 0.1) = 1.11
  p.integrator = Integrator::kUla;
  std::fill(x.begin(), x.end(), 0.0);
  kernels::propagate(kernels::Execution::kParallel, *u, x, p, 9, 1);
  double q2 = 0;
  for (double v : x) q2 += v * v;
  q2 /= n;
  CHECK(q2 - 1.0 > 0.05);
}

TEST_CASE("integrator names") {
  CHECK(parse_integrator("ula") == Integrator::kUla);
  CHECK(parse_integrator("mala") == Integrator::kMala);
  CHECK(to_string(Integrator::kMala) == "mala");
  CHECK_THROWS(parse_integrator("rk4"));
}
