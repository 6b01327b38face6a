#ifndef ASMC_CONFIG_HPP
#define ASMC_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "asmc/dynamics.hpp"
#include "asmc/landscape.hpp"
#include "asmc/potential.hpp"
#include "asmc/schedule.hpp"
#include "asmc/smc.hpp"

// Run configuration. The text format is flat `key = value` lines with `#`
// comments and optional `[section]` headers, one per subcommand. Several
// `key=value` pairs may share a line; values may be double-quoted. Numbers
// accept a fraction form such as 1/3 and `inf`. Keys in a section apply only
// to that subcommand and override the global ones.

namespace asmc {

struct ConfigText {
  std::map<std::string, std::string> global;
  std::map<std::string, std::map<std::string, std::string>> sections;
};

/// Syntax only: splits the text into global and section maps.
ConfigText parse_config_text(const std::string& text);

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"plan", "sample", "oracle", "verify", "bench", "calibrate"};
  return names;
}

struct RunConfig {
  std::string potential;
  ParamMap potential_params;  ///< fully defaulted

  std::optional<double> eta;
  double eta1 = 1.0;
  double delta = 0.1;
  double theta = 0.1;
  double alpha = 1.0;
  double nu = 1.0;
  double c_n = 1.0;
  double c_t = 1.0;
  double c_tem = 1.0;
  double budget_cap = 1e10;
  double dt = 1e-2;
  double guard_radius = 1e6;
  Integrator integrator = Integrator::kUla;
  std::optional<std::size_t> n;
  std::optional<std::size_t> m;
  std::optional<double> t;
  bool unsafe = false;
  std::uint64_t seed = 0;
  std::string out_dir;
  double c_ini = 10.0;
  InitKind init = InitKind::kCube;
  Resampler resampler = Resampler::kMultinomial;
  int threads = 0;

  // oracle
  std::vector<double> eps_list;
  std::size_t nodes = 0;  ///< spectral cells per axis, 0 = default
  std::size_t n_modes = 4;
  std::string fixtures_dir = "fixtures";
  // verify / calibrate
  std::size_t runs = 50;
  std::uint64_t seed_base = 1;
  std::string test_functions = "basins";  ///< "basins" or a comma list of names
  double required = -1.0;                 ///< calibrate: coverage to accept, < 0 = binomial threshold
  std::optional<std::size_t> start_n;
  std::optional<double> start_t;
  int iterations = 6;
  // bench
  std::vector<double> etas;
  std::size_t baseline_seeds = 20;
  std::size_t thin = 100;
};

/// Merges the global keys with the section of `subcommand` (may be empty),
/// applies defaults and validates. Throws ConfigError for unknown keys,
/// invalid ranges or an unknown potential id.
RunConfig resolve_config(const ConfigText& text, const std::string& subcommand = "");
RunConfig parse_config(const std::string& text, const std::string& subcommand = "");

/// Validation shared by every path that edits a config.
void validate_config(const RunConfig& cfg);

/// Numeric value parser used by the config: plain decimal, `a/b`, `inf`.
double parse_number(const std::string& key, const std::string& value);

/// Canonical `key=value` lines of the global run keys (sorted, excluding
/// out_dir and threads) and their 64-bit FNV-1a hash.
std::string canonical_config(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);
/// Hash of the keys an oracle fixture depends on: potential, its
/// parameters, alpha, nodes and n_modes.
std::uint64_t oracle_hash(const RunConfig& cfg);
std::uint64_t fnv1a(const std::string& text);
std::string hex_hash(std::uint64_t h);

PotentialPtr build_potential(const RunConfig& cfg);
/// Plan inputs from the config and landscape (barrier ratio, C_K).
PlanInputs plan_inputs(const RunConfig& cfg, const LandscapeSummary& landscape);
PlanOverrides plan_overrides(const RunConfig& cfg);
AsmcOptions asmc_options(const RunConfig& cfg);

}  // namespace asmc

#endif  // ASMC_CONFIG_HPP
