#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "asmc/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "asmc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = asmc::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("asmc_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("plan prints the schedule") {
  const auto r = run({"plan", "-s", "potential=quartic", "-s", "eta=1/3", "-s", "m=3", "-s", "n=100", "-s", "t=1",
                      "--unsafe"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  const auto levels = j["plan"]["levels"].get<std::vector<double>>();
  REQUIRE(levels.size() == 3);
  CHECK(levels[0] == doctest::Approx(1.0));
  CHECK(levels[1] == doctest::Approx(0.5));
  CHECK(levels[2] == doctest::Approx(1.0 / 3.0));
  CHECK(j["landscape"]["barrier_ratio"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("exit codes and error JSON") {
  auto r = run({});
  CHECK(r.code == 2);
  CHECK(json::parse(r.err)["error"] == "usage_error");

  r = run({"frobnicate"});
  CHECK(r.code == 2);

  r = run({"plan", "-s", "potential=quartic", "-s", "eta=1.5"});
  CHECK(r.code == 2);
  CHECK(json::parse(r.err)["error"] == "config_error");

  r = run({"plan", "-s", "potential=unknown", "-s", "eta=0.1"});
  CHECK(r.code == 2);
  CHECK(json::parse(r.err)["message"].get<std::string>().find("quartic") != std::string::npos);

  r = run({"plan", "-s", "noequals"});
  CHECK(r.code == 2);

  // default constants exceed the step budget: a runtime failure, not a usage error
  r = run({"plan", "-s", "potential=quartic", "-s", "eta=0.1"});
  CHECK(r.code == 1);
  CHECK(json::parse(r.err)["error"] == "budget_exceeded");

  r = run({"plan", "--config", "/nonexistent/file.conf"});
  CHECK(r.code == 2);

  r = run({"--version"});
  CHECK(r.code == 0);
  CHECK(!r.out.empty());
}

TEST_CASE("sample is byte-identical for a fixed seed and records the config hash") {
  const auto dir = scratch("sample");
  const std::vector<std::string> common{"-s", "potential=quartic", "-s", "eta=0.2", "-s", "n=300",
                                        "-s", "t=0.5",             "--unsafe", "--seed", "5"};
  auto a = common;
  a.insert(a.begin(), "sample");
  a.insert(a.end(), {"--out", (dir / "a").string(), "--json"});
  auto b = common;
  b.insert(b.begin(), "sample");
  b.insert(b.end(), {"--out", (dir / "b").string(), "--threads", "1"});
  const auto ra = run(a);
  const auto rb = run(b);
  REQUIRE(ra.code == 0);
  REQUIRE(rb.code == 0);
  const auto summary = json::parse(ra.out);
  const std::string hash = summary["config_hash"];
  const std::string sa = slurp(dir / "a" / "samples.csv");
  CHECK(sa == slurp(dir / "b" / "samples.csv"));
  CHECK(sa.rfind("# config_hash: " + hash, 0) == 0);
  CHECK(slurp(dir / "a" / "trace.csv").rfind("# config_hash: " + hash, 0) == 0);
  const auto record = json::parse(slurp(dir / "a" / "run.json"));
  CHECK(record["config_hash"] == hash);
  CHECK(record["trace"].size() == record["plan"]["m"].get<std::size_t>());

  std::istringstream trace(slurp(dir / "a" / "trace.csv"));
  std::string line;
  std::getline(trace, line);
  std::getline(trace, line);
  CHECK(line == "level,eta,ess,frac_basin_1,frac_basin_2,frac_in_K,resample_max_count,wall_ms");
}

TEST_CASE("oracle then verify, and stale fixtures are refused") {
  const auto dir = scratch("fixtures");
  const std::vector<std::string> base{"-s", "potential=quartic", "-s", "eps_list=0.1,0.2", "-s",
                                      "fixtures_dir=" + dir.string()};
  auto o = base;
  o.insert(o.begin(), "oracle");
  o.push_back("--json");
  const auto ro = run(o);
  REQUIRE(ro.code == 0);
  CHECK(json::parse(ro.out)["fixtures"].size() == 4);
  CHECK(fs::exists(dir / "quartic" / "0.1" / "spectral.json"));

  auto v = base;
  v.insert(v.begin(), "verify");
  v.push_back("--json");
  const auto rv = run(v);
  CHECK(rv.code == 0);
  CHECK(json::parse(rv.out)["pass"] == true);

  auto stale = v;
  stale.insert(stale.end(), {"-s", "alpha=0.5"});
  const auto rs = run(stale);
  CHECK(rs.code == 1);
  CHECK(json::parse(rs.err)["error"] == "fixture_error");

  auto missing = v;
  missing.insert(missing.end(), {"-s", "eps_list=0.3"});
  const auto rm = run(missing);
  CHECK(rm.code == 1);
  CHECK(json::parse(rm.err)["error"] == "fixture_error");
}

TEST_CASE("verify runs a coverage trial at eta") {
  const auto dir = scratch("coverage");
  const std::vector<std::string> base{"-s", "potential=quartic", "-s", "eps_list=0.2", "-s",
                                      "fixtures_dir=" + dir.string()};
  auto o = base;
  o.insert(o.begin(), "oracle");
  REQUIRE(run(o).code == 0);
  auto v = base;
  v.insert(v.begin(), "verify");
  v.insert(v.end(), {"-s", "eta=0.2", "-s", "n=400", "-s", "t=0.5", "-s", "runs=20", "--unsafe", "--json", "-o",
                     (dir / "run").string()});
  auto pass = v;
  pass.insert(pass.end(), {"-s", "delta=0.5"});
  const auto rp = run(pass);
  CHECK(rp.code == 0);
  CHECK(json::parse(rp.out)["coverage"]["success_fraction"] == 1.0);
  std::istringstream csv(slurp(dir / "run" / "coverage.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "seed,error,success");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    CHECK(line.substr(line.size() - 2) == ",1");
  }
  CHECK(rows == 20);
  auto fail = v;
  fail.insert(fail.end(), {"-s", "delta=0.001"});
  const auto rf = run(fail);
  CHECK(rf.code == 1);
  CHECK(json::parse(rf.out)["pass"] == false);
}

TEST_CASE("every subcommand emits valid JSON with --json") {
  const auto dir = scratch("json");
  const auto rb = run({"bench", "-s", "potential=quartic", "-s", "c_n=0.01", "-s", "c_t=1e-12", "-s", "alpha=0.01",
                       "-s", "budget_cap=inf", "-s", "etas=1/4,1/8", "--json"});
  REQUIRE(rb.code == 0);
  CHECK(json::parse(rb.out)["complexity"]["rows"].size() == 2);

  const auto rc = run({"calibrate", "-s", "potential=quartic", "-s", "eta=0.25", "-s", "delta=0.5", "-s", "runs=3",
                       "-s", "start_n=50", "-s", "start_t=0.1", "-s", "iterations=1", "--out", dir.string(), "--json"});
  CHECK(rc.code == 0);
  const auto cal = json::parse(rc.out);
  CHECK(cal["success"] == true);
  CHECK(fs::exists(dir / "calibration.json"));
}
