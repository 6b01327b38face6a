#include <doctest.h>

#include <cmath>
#include <string>

#include "asmc/config.hpp"
#include "asmc/error.hpp"

using namespace asmc;

TEST_CASE("minimal config gets the documented defaults") {
  const auto cfg = parse_config(R"(potential="quartic" eta=0.1)");
  CHECK(cfg.potential == "quartic");
  CHECK(*cfg.eta == 0.1);
  CHECK(cfg.eta1 == 1.0);
  CHECK(cfg.delta == 0.1);
  CHECK(cfg.theta == 0.1);
  CHECK(cfg.alpha == 1.0);
  CHECK(cfg.nu == 1.0);
  CHECK(cfg.dt == 0.01);
  CHECK(cfg.c_n == 1.0);
  CHECK(cfg.c_t == 1.0);
  CHECK(cfg.c_tem == 1.0);
  CHECK(cfg.budget_cap == 1e10);
  CHECK(cfg.integrator == Integrator::kUla);
  CHECK(cfg.resampler == Resampler::kMultinomial);
  CHECK(cfg.init == InitKind::kCube);
  CHECK(cfg.potential_params.at("tilt") == 0.0);
}

TEST_CASE("range and id errors") {
  CHECK_THROWS_AS(parse_config("potential = quartic\neta = 1.5"), ConfigError);
  CHECK_NOTHROW(parse_config("potential = quartic\neta = 1"));
  try {
    parse_config(R"(potential="unknown" eta=0.1)");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("quartic") != std::string::npos);
    CHECK(msg.find("double_well_2d") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("potential = quartic\nbogus = 1"), ConfigError);
  CHECK_THROWS_AS(parse_config("potential = quartic\ndelta = 1"), ConfigError);
  CHECK_THROWS_AS(parse_config("potential = quartic\ntheta = 0"), ConfigError);
  CHECK_THROWS_AS(parse_config("potential = quartic\neta = abc"), ConfigError);
  CHECK_THROWS_AS(parse_config("potential = quartic\nn = 2.5"), ConfigError);
  CHECK_THROWS_AS(parse_config("potential = quartic\neta = 0.1\neta = 0.2"), ConfigError);
  CHECK_THROWS_AS(parse_config("eta = 0.1"), ConfigError);
  CHECK_THROWS_AS(parse_config("potential = quartic\n[nonsense]\nx = 1"), ConfigError);
  CHECK_THROWS_AS(parse_config("potential = quartic\nintegrator = rk4"), ConfigError);
  CHECK_THROWS_AS(parse_config("potential = quartic\nthis is not a pair"), ConfigError);
}

TEST_CASE("numbers, comments, quotes and parameters") {
  const auto cfg = parse_config(
      "# comment line\n"
      "potential = \"tilted_quartic\"   # trailing comment\n"
      "eta = 1/3  delta=0.05\n"
      "tilt = 0.2\n"
      "budget_cap = inf\n");
  CHECK(*cfg.eta == doctest::Approx(1.0 / 3.0));
  CHECK(cfg.delta == 0.05);
  CHECK(cfg.potential_params.at("tilt") == 0.2);
  CHECK(std::isinf(cfg.budget_cap));
  CHECK(parse_number("x", "  2/8 ") == 0.25);
  CHECK_THROWS_AS(parse_number("x", "1/0"), ConfigError);
  CHECK_THROWS_AS(parse_number("x", "nan"), ConfigError);
}

TEST_CASE("sections apply to their subcommand only") {
  const std::string text =
      "potential = quartic\neta = 0.05\nseed = 4\n"
      "[verify]\nruns = 7\nseed = 9\neps_list = 0.1, 0.05\n"
      "[bench]\netas = 1/4, 1/8\n";
  const auto plain = parse_config(text, "plan");
  CHECK(plain.seed == 4);
  CHECK(plain.runs == 50);
  const auto verify = parse_config(text, "verify");
  CHECK(verify.seed == 9);
  CHECK(verify.runs == 7);
  CHECK(verify.eps_list == std::vector<double>{0.1, 0.05});
  CHECK(parse_config(text, "bench").etas.size() == 2);
  CHECK_THROWS_AS(parse_config("potential = quartic\n[bench]\nruns = 3\n", "plan"), ConfigError);
  CHECK_THROWS_AS(parse_config("potential = quartic\nruns = 3\n"), ConfigError);
}

TEST_CASE("config hash") {
  const auto a = parse_config("potential = quartic\neta = 0.1\nout_dir = x\nthreads = 3");
  const auto b = parse_config("eta=0.1 potential=quartic");
  const auto c = parse_config("potential = quartic\neta = 0.1\nseed = 1");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(hex_hash(config_hash(a)).size() == 16);
  CHECK(fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  // oracle fixtures do not depend on sampler settings
  CHECK(oracle_hash(a) == oracle_hash(c));
  const auto d = parse_config("potential = quartic\neta = 0.1\nalpha = 0.5");
  CHECK(oracle_hash(a) != oracle_hash(d));
}

TEST_CASE("plan inputs from a config") {
  const auto cfg = parse_config("potential = quartic\neta = 0.1\nc_n = 0.5\nm = 4\nunsafe = true");
  const auto ls = landscape_summary(build_potential(cfg), cfg.alpha);
  const auto in = plan_inputs(cfg, ls);
  CHECK(in.constants.c_n == 0.5);
  CHECK(in.c_k == doctest::Approx(1.0 / std::sqrt(2.0)));
  const auto ov = plan_overrides(cfg);
  CHECK(*ov.m == 4);
  CHECK(ov.unsafe);
  CHECK_THROWS_AS(plan_inputs(parse_config("potential = quartic"), ls), ConfigError);
}
