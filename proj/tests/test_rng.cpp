#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "asmc/rng.hpp"

using namespace asmc;

TEST_CASE("philox4x32-10 known answers") {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  CHECK(philox4x32_10(A4{0, 0, 0, 0}, A2{0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10(A4{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, A2{0xffffffffu, 0xffffffffu}) ==
        A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10(A4{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, A2{0xa4093822u, 0x299f31d0u}) ==
        A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  StreamRng a({7, 2, 3}), b({7, 2, 3}), c({7, 2, 4}), d({8, 2, 3}), e({7, 3, 3});
  std::set<std::uint64_t> firsts;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    if (i == 0) {
      firsts.insert(x);
      firsts.insert(c());
      firsts.insert(d());
      firsts.insert(e());
    }
  }
  CHECK(firsts.size() == 4);
}

TEST_CASE("uniform and normal moments") {
  NormalSource src({11, 0, 0});
  const int n = 200000;
  double s = 0, s2 = 0, s4 = 0, u = 0;
  for (int i = 0; i < n; ++i) {
    const double z = src();
    s += z;
    s2 += z * z;
    s4 += z * z * z * z;
    const double v = src.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    u += v;
  }
  CHECK(std::abs(s / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(s4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
  CHECK(std::abs(u / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}
