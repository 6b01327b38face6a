#include <doctest.h>

#include <cstring>
#include <vector>

#include "asmc/kernels.hpp"
#include "asmc/landscape.hpp"
#include "asmc/smc.hpp"

using namespace asmc;
using kernels::Execution;

TEST_CASE("serial and parallel kernels are bit-identical") {
  const auto u = make_potential("double_well_2d");
  const auto ls = landscape_summary(u, 1.0);
  const std::size_t n = 3000;
  auto start = initial_points(InitKind::kCube, 2, n, 4);
  LangevinParams p;
  p.temperature = 0.3;
  p.total_time = 0.5;

  for (int threads : {1, 2, 4}) {
    CAPTURE(threads);
    kernels::set_thread_limit(threads);
    auto a = start, b = start;
    kernels::propagate_serial(*u, a, p, 4, 2);
    kernels::propagate_parallel(*u, b, p, 4, 2);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);

    std::vector<double> wa(n), wb(n);
    kernels::log_weights_serial(*u, a, 0.5, 0.4, wa);
    kernels::log_weights_parallel(*u, a, 0.5, 0.4, wb);
    CHECK(std::memcmp(wa.data(), wb.data(), n * sizeof(double)) == 0);

    const auto ca = kernels::classify_serial(ls, a);
    const auto cb = kernels::classify_parallel(ls, a);
    CHECK(ca.basin == cb.basin);
    CHECK(ca.in_k == cb.in_k);
  }
  kernels::set_thread_limit(0);
}

TEST_CASE("weights kernel matches the formula") {
  const auto u = make_potential("quartic");
  const std::vector<double> x{0.0, 1.0, 0.5};
  std::vector<double> w(3);
  kernels::log_weights(Execution::kSerial, *u, x, 0.5, 1.0 / 3.0, w);
  CHECK(w[0] == doctest::Approx(-1.0));
  CHECK(w[1] == doctest::Approx(0.0));
  CHECK(w[2] == doctest::Approx(-u->energy(Point{0.5})));
}
