#include "asmc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <regex>
#include <set>
#include <sstream>

#include "asmc/error.hpp"

namespace asmc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

// Drops a trailing comment that is not inside quotes.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

const std::set<std::string>& global_keys() {
  static const std::set<std::string> keys{
      "potential", "eta",  "eta1",  "delta",     "theta",       "alpha",        "nu",         "c_n",
      "c_t",       "c_tem", "budget_cap", "dt",  "guard_radius", "integrator", "n",          "m",
      "t",         "unsafe", "seed", "out_dir", "c_ini",       "init",         "resampler",  "threads"};
  return keys;
}

const std::map<std::string, std::set<std::string>>& section_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"plan", {}},
      {"sample", {}},
      {"oracle", {"eps_list", "nodes", "n_modes", "fixtures_dir"}},
      {"verify", {"runs", "fixtures_dir", "seed_base", "eps_list", "test_functions", "nodes", "n_modes"}},
      {"bench", {"etas", "baseline_seeds", "thin", "nodes", "seed_base"}},
      {"calibrate", {"runs", "start_n", "start_t", "iterations", "seed_base", "test_functions", "required"}},
  };
  return keys;
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number(key, item));
  }
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  const double v = parse_number(key, value);
  if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e15) {
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + value + "'");
  }
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + value + "'");
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(value, &used);
    if (used == value.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw ConfigError("key '" + key + "': expected an unsigned integer, got '" + value + "'");
}

template <class Fn>
auto translate(Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

void apply(RunConfig& cfg, const std::string& key, const std::string& value, ParamMap& params) {
  if (key == "potential") cfg.potential = value;
  else if (key == "eta") cfg.eta = parse_number(key, value);
  else if (key == "eta1") cfg.eta1 = parse_number(key, value);
  else if (key == "delta") cfg.delta = parse_number(key, value);
  else if (key == "theta") cfg.theta = parse_number(key, value);
  else if (key == "alpha") cfg.alpha = parse_number(key, value);
  else if (key == "nu") cfg.nu = parse_number(key, value);
  else if (key == "c_n") cfg.c_n = parse_number(key, value);
  else if (key == "c_t") cfg.c_t = parse_number(key, value);
  else if (key == "c_tem") cfg.c_tem = parse_number(key, value);
  else if (key == "budget_cap") cfg.budget_cap = parse_number(key, value);
  else if (key == "dt") cfg.dt = parse_number(key, value);
  else if (key == "guard_radius") cfg.guard_radius = parse_number(key, value);
  else if (key == "integrator") cfg.integrator = translate([&] { return parse_integrator(value); });
  else if (key == "n") cfg.n = parse_count(key, value);
  else if (key == "m") cfg.m = parse_count(key, value);
  else if (key == "t") cfg.t = parse_number(key, value);
  else if (key == "unsafe") cfg.unsafe = parse_bool(key, value);
  else if (key == "seed") cfg.seed = parse_seed(key, value);
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "c_ini") cfg.c_ini = parse_number(key, value);
  else if (key == "init") cfg.init = translate([&] { return parse_init(value); });
  else if (key == "resampler") cfg.resampler = translate([&] { return parse_resampler(value); });
  else if (key == "threads") cfg.threads = static_cast<int>(parse_count(key, value));
  else if (key == "eps_list") cfg.eps_list = parse_list(key, value);
  else if (key == "nodes") cfg.nodes = parse_count(key, value);
  else if (key == "n_modes") cfg.n_modes = parse_count(key, value);
  else if (key == "fixtures_dir") cfg.fixtures_dir = value;
  else if (key == "runs") cfg.runs = parse_count(key, value);
  else if (key == "seed_base") cfg.seed_base = parse_seed(key, value);
  else if (key == "test_functions") cfg.test_functions = value;
  else if (key == "required") cfg.required = parse_number(key, value);
  else if (key == "start_n") cfg.start_n = parse_count(key, value);
  else if (key == "start_t") cfg.start_t = parse_number(key, value);
  else if (key == "iterations") cfg.iterations = static_cast<int>(parse_count(key, value));
  else if (key == "etas") cfg.etas = parse_list(key, value);
  else if (key == "baseline_seeds") cfg.baseline_seeds = parse_count(key, value);
  else if (key == "thin") cfg.thin = parse_count(key, value);
  else params[key] = parse_number(key, value);
}

void check_probability(const char* name, double v) {
  if (!(v > 0.0 && v < 1.0)) throw ConfigError(std::string(name) + " must lie in (0, 1)");
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double parse_number(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  const auto whole = [&](const std::string& s) {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return x;
  };
  try {
    const auto slash = v.find('/');
    if (slash != std::string::npos) {
      const double num = whole(trim(v.substr(0, slash)));
      const double den = whole(trim(v.substr(slash + 1)));
      if (den == 0.0) throw std::invalid_argument(v);
      return num / den;
    }
    const double x = whole(v);
    if (std::isnan(x)) throw std::invalid_argument(v);
    return x;
  } catch (const std::logic_error&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  }
}

ConfigText parse_config_text(const std::string& text) {
  ConfigText out;
  std::map<std::string, std::string>* target = &out.global;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  static const std::regex pair(R"(([A-Za-z_][A-Za-z0-9_]*)\s*=\s*("[^"]*"|[^\s"]+))");
  static const std::regex header(R"(\[\s*([A-Za-z_]+)\s*\])");
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const auto where = " (line " + std::to_string(line_no) + ")";
    std::smatch m;
    if (std::regex_match(line, m, header)) {
      const std::string name = m[1];
      if (!section_keys().count(name)) {
        throw ConfigError("unknown section [" + name + "]" + where + "; valid: plan, sample, oracle, verify, bench, calibrate");
      }
      target = &out.sections[name];
      continue;
    }
    const auto assign = [&](const std::string& key, const std::string& value) {
      if (target->count(key)) throw ConfigError("duplicate key '" + key + "'" + where);
      (*target)[key] = value;
    };
    if (std::count(line.begin(), line.end(), '=') == 1) {
      const auto eq = line.find('=');
      const std::string key = trim(line.substr(0, eq));
      if (!std::regex_match(key, std::regex("[A-Za-z_][A-Za-z0-9_]*"))) throw ConfigError("malformed key" + where);
      assign(key, unquote(trim(line.substr(eq + 1))));
      continue;
    }
    std::string rest = line;
    bool any = false;
    while (std::regex_search(rest, m, pair)) {
      if (!trim(m.prefix()).empty()) throw ConfigError("malformed line" + where + ": " + line);
      assign(m[1], unquote(m[2]));
      rest = m.suffix();
      any = true;
    }
    if (!any || !trim(rest).empty()) throw ConfigError("malformed line" + where + ": " + line);
  }
  return out;
}

RunConfig resolve_config(const ConfigText& text, const std::string& subcommand) {
  if (!subcommand.empty() && !section_keys().count(subcommand)) {
    throw ConfigError("unknown subcommand '" + subcommand + "'");
  }
  std::map<std::string, std::string> merged = text.global;
  if (const auto it = text.sections.find(subcommand); it != text.sections.end()) {
    for (const auto& [k, v] : it->second) merged[k] = v;
  }

  RunConfig cfg;
  ParamMap params;
  for (const auto& [key, value] : merged) apply(cfg, key, value, params);
  if (cfg.potential.empty()) throw ConfigError("missing required key 'potential'");
  ParamMap defaults = translate([&] { return builtin_potential_defaults(cfg.potential); });
  for (const auto& [key, value] : params) {
    if (!defaults.count(key)) {
      std::string valid;
      for (const auto& [k, v] : defaults) {
        (void)v;
        valid += (valid.empty() ? "" : ", ") + k;
      }
      throw ConfigError("unknown key '" + key + "'" +
                        (valid.empty() ? std::string() : " (parameters of " + cfg.potential + ": " + valid + ")"));
    }
    defaults[key] = value;
  }
  const auto known = [&](const std::string& key, const std::set<std::string>& extra) {
    return global_keys().count(key) || extra.count(key) || defaults.count(key);
  };
  for (const auto& [key, value] : text.global) {
    (void)value;
    if (!known(key, {})) throw ConfigError("unknown key '" + key + "' (section keys belong under their [section])");
  }
  for (const auto& [name, keys] : text.sections) {
    for (const auto& [key, value] : keys) {
      (void)value;
      if (!known(key, section_keys().at(name))) throw ConfigError("unknown key '" + key + "' in section [" + name + "]");
    }
  }
  cfg.potential_params = defaults;
  validate_config(cfg);
  return cfg;
}

RunConfig parse_config(const std::string& text, const std::string& subcommand) {
  return resolve_config(parse_config_text(text), subcommand);
}

void validate_config(const RunConfig& cfg) {
  if (cfg.eta) {
    if (!(*cfg.eta > 0.0)) throw ConfigError("eta must be positive");
    if (*cfg.eta > cfg.eta1) throw ConfigError("eta must not exceed eta1 (eta = " + format_number(*cfg.eta) +
                                               ", eta1 = " + format_number(cfg.eta1) + ")");
  }
  if (!(cfg.eta1 > 0.0)) throw ConfigError("eta1 must be positive");
  check_probability("delta", cfg.delta);
  check_probability("theta", cfg.theta);
  if (!(cfg.alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(cfg.nu > 0.0)) throw ConfigError("nu must be positive");
  if (!(cfg.c_n > 0.0) || !(cfg.c_t > 0.0) || !(cfg.c_tem > 0.0)) throw ConfigError("c_n, c_t, c_tem must be positive");
  if (!(cfg.budget_cap > 0.0)) throw ConfigError("budget_cap must be positive");
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ConfigError("dt must be positive and finite");
  if (!(cfg.guard_radius > 0.0)) throw ConfigError("guard_radius must be positive");
  if (cfg.n && *cfg.n == 0) throw ConfigError("n must be at least 1");
  if (cfg.m && *cfg.m == 0) throw ConfigError("m must be at least 1");
  if (cfg.t && !(*cfg.t > 0.0)) throw ConfigError("t must be positive");
  if (!(cfg.c_ini > 0.0)) throw ConfigError("c_ini must be positive");
  for (double e : cfg.eps_list) {
    if (!(e > 0.0)) throw ConfigError("eps_list entries must be positive");
  }
  for (double e : cfg.etas) {
    if (!(e > 0.0)) throw ConfigError("etas entries must be positive");
  }
  if (cfg.n_modes < 2 || cfg.n_modes > 10) throw ConfigError("n_modes must lie in [2, 10]");
  if (cfg.runs == 0) throw ConfigError("runs must be positive");
  if (cfg.thin == 0) throw ConfigError("thin must be positive");
  if (cfg.required > 1.0) throw ConfigError("required must not exceed 1");
  if (cfg.start_t && !(*cfg.start_t > 0.0)) throw ConfigError("start_t must be positive");
  translate([&] { return make_potential(cfg.potential, cfg.potential_params); });
}

std::string canonical_config(const RunConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["potential"] = cfg.potential;
  for (const auto& [k, v] : cfg.potential_params) kv["param." + k] = format_number(v);
  kv["eta"] = cfg.eta ? format_number(*cfg.eta) : "none";
  kv["eta1"] = format_number(cfg.eta1);
  kv["delta"] = format_number(cfg.delta);
  kv["theta"] = format_number(cfg.theta);
  kv["alpha"] = format_number(cfg.alpha);
  kv["nu"] = format_number(cfg.nu);
  kv["c_n"] = format_number(cfg.c_n);
  kv["c_t"] = format_number(cfg.c_t);
  kv["c_tem"] = format_number(cfg.c_tem);
  kv["budget_cap"] = format_number(cfg.budget_cap);
  kv["dt"] = format_number(cfg.dt);
  kv["guard_radius"] = format_number(cfg.guard_radius);
  kv["integrator"] = to_string(cfg.integrator);
  kv["n"] = cfg.n ? std::to_string(*cfg.n) : "none";
  kv["m"] = cfg.m ? std::to_string(*cfg.m) : "none";
  kv["t"] = cfg.t ? format_number(*cfg.t) : "none";
  kv["unsafe"] = cfg.unsafe ? "true" : "false";
  kv["seed"] = std::to_string(cfg.seed);
  kv["c_ini"] = format_number(cfg.c_ini);
  kv["init"] = to_string(cfg.init);
  kv["resampler"] = to_string(cfg.resampler);
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex_hash(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a(canonical_config(cfg)); }

std::uint64_t oracle_hash(const RunConfig& cfg) {
  std::string s = "potential=" + cfg.potential + "\n";
  for (const auto& [k, v] : cfg.potential_params) s += "param." + k + "=" + format_number(v) + "\n";
  s += "alpha=" + format_number(cfg.alpha) + "\n";
  s += "nodes=" + std::to_string(cfg.nodes) + "\n";
  s += "n_modes=" + std::to_string(cfg.n_modes) + "\n";
  return fnv1a(s);
}

PotentialPtr build_potential(const RunConfig& cfg) { return make_potential(cfg.potential, cfg.potential_params); }

PlanInputs plan_inputs(const RunConfig& cfg, const LandscapeSummary& landscape) {
  if (!cfg.eta) throw ConfigError("missing required key 'eta'");
  PlanInputs in;
  in.eta = *cfg.eta;
  in.eta1 = cfg.eta1;
  in.delta = cfg.delta;
  in.theta = cfg.theta;
  in.alpha = cfg.alpha;
  in.nu = cfg.nu;
  in.barrier_ratio = landscape.barrier_ratio;
  in.c_k = landscape.c_k;
  in.constants = {cfg.c_n, cfg.c_t, cfg.c_tem};
  in.dt = cfg.dt;
  in.budget_cap = cfg.budget_cap;
  return in;
}

PlanOverrides plan_overrides(const RunConfig& cfg) {
  PlanOverrides ov;
  ov.m = cfg.m;
  ov.n = cfg.n;
  ov.t = cfg.t;
  ov.unsafe = cfg.unsafe;
  return ov;
}

AsmcOptions asmc_options(const RunConfig& cfg) {
  AsmcOptions o;
  o.seed = cfg.seed;
  o.dt = cfg.dt;
  o.guard_radius = cfg.guard_radius;
  o.integrator = cfg.integrator;
  o.resampler = cfg.resampler;
  o.c_ini = cfg.c_ini;
  o.budget_cap = cfg.budget_cap;
  return o;
}

}  // namespace asmc
