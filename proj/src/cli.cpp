#include "asmc/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "asmc/config.hpp"
#include "asmc/diagnostics.hpp"
#include "asmc/error.hpp"
#include "asmc/io.hpp"
#include "asmc/kernels.hpp"
#include "asmc/oracle.hpp"

namespace asmc {

namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string config_path;
  std::vector<std::string> sets;
  bool json = false;
  int threads = -1;
  bool unsafe = false;
  std::string out_dir;
  std::string seed;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message) : Error("usage_error", message) {}
};

RunConfig load_config(const Flags& flags, const std::string& sub) {
  ConfigText text;
  if (!flags.config_path.empty()) text = parse_config_text(read_text_file(flags.config_path));
  auto& section = text.sections[sub];
  for (const auto& kv : flags.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects KEY=VALUE, got '" + kv + "'");
    section[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  if (flags.threads >= 0) section["threads"] = std::to_string(flags.threads);
  if (flags.unsafe) section["unsafe"] = "true";
  if (!flags.out_dir.empty()) section["out_dir"] = flags.out_dir;
  if (!flags.seed.empty()) section["seed"] = flags.seed;
  RunConfig cfg = resolve_config(text, sub);
  if (cfg.out_dir.empty()) {
    const char* env = std::getenv("ASMC_OUT_DIR");
    cfg.out_dir = env && *env ? env : "out";
  }
  return cfg;
}

LandscapeSummary landscape_for(const PotentialPtr& potential, double alpha) {
  if (potential->minima().size() >= 2) return landscape_summary(potential, alpha);
  LandscapeSummary ls;
  ls.potential = potential;
  ls.alpha = alpha;
  ls.saddle_height = std::numeric_limits<double>::infinity();
  ls.energy_barrier = std::numeric_limits<double>::infinity();
  ls.barrier_ratio = 1.0;
  ls.b_threshold = std::numeric_limits<double>::infinity();
  ls.c_k = 0.0;
  return ls;
}

void emit(std::ostream& out, const Flags& flags, const Json& doc, const std::vector<std::string>& lines) {
  if (flags.json) {
    out << doc.dump(2) << "\n";
  } else {
    for (const auto& l : lines) out << l << "\n";
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<double> eps_values(const RunConfig& cfg) {
  if (!cfg.eps_list.empty()) return cfg.eps_list;
  if (cfg.eta) return {*cfg.eta};
  throw ConfigError("set eps_list (or eta) for this subcommand");
}

std::vector<TestFunction> test_functions(const RunConfig& cfg, const LandscapeSummary& ls) {
  std::vector<TestFunction> fns;
  if (cfg.test_functions == "basins") {
    for (std::size_t i = 0; i < ls.potential->minima().size(); ++i) fns.push_back(basin_indicator(ls, i));
    return fns;
  }
  std::string item;
  std::stringstream ss(cfg.test_functions);
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (!item.empty()) fns.push_back(make_test_function(item, ls));
  }
  if (fns.empty()) throw ConfigError("test_functions is empty");
  return fns;
}

int cmd_plan(const RunConfig& cfg, const Flags& flags, std::ostream& out) {
  const auto potential = build_potential(cfg);
  const auto ls = landscape_for(potential, cfg.alpha);
  const Plan plan = plan_with_overrides(plan_inputs(cfg, ls), plan_overrides(cfg));
  Json doc{{"plan", to_json(plan)}, {"landscape", to_json(ls)}, {"config", to_json(cfg)}};
  (void)flags;
  out << doc.dump(2) << "\n";
  return 0;
}

int cmd_sample(const RunConfig& cfg, const Flags& flags, std::ostream& out) {
  const auto potential = build_potential(cfg);
  const auto ls = landscape_for(potential, cfg.alpha);
  const Plan plan = plan_with_overrides(plan_inputs(cfg, ls), plan_overrides(cfg));
  const std::uint64_t hash = config_hash(cfg);
  const fs::path dir = cfg.out_dir;
  const std::size_t wells = potential->minima().size();
  TraceWriter trace(dir / "trace.csv", wells, hash);
  AsmcOptions opts = asmc_options(cfg);
  opts.landscape = &ls;
  opts.on_level = [&](const LevelRecord& rec) { trace.write(rec); };
  const auto init = initial_points(cfg.init, potential->dimension(), plan.n, cfg.seed);
  const auto result = run_asmc(*potential, plan, init, opts);
  write_samples_csv(dir / "samples.csv", result.samples, result.dim, hash);

  Json levels = Json::array();
  for (const auto& rec : result.trace.levels) levels.push_back(to_json(rec));
  std::vector<double> fractions(wells, 0.0);
  for (std::size_t i = 0; i < wells; ++i) fractions[i] = sample_mean(result.samples, result.dim, basin_indicator(ls, i).h);
  Json record{{"version", version_string()},
              {"config_hash", hex_hash(hash)},
              {"seed", cfg.seed},
              {"config", to_json(cfg)},
              {"plan", to_json(plan)},
              {"landscape", to_json(ls)},
              {"steps", result.steps},
              {"basin_fractions", fractions},
              {"trace", levels},
              {"files", {{"samples", (dir / "samples.csv").string()}, {"trace", (dir / "trace.csv").string()}}}};
  write_text_file(dir / "run.json", record.dump(2) + "\n");
  Json summary{{"out_dir", dir.string()}, {"config_hash", hex_hash(hash)}, {"n", plan.n}, {"m", plan.m},
               {"t", plan.t}, {"steps", result.steps}, {"basin_fractions", fractions}};
  std::string fr;
  for (double f : fractions) fr += (fr.empty() ? "" : " ") + fmt(f);
  emit(out, flags, summary,
       {"samples: " + (dir / "samples.csv").string(), "trace: " + (dir / "trace.csv").string(),
        "N=" + std::to_string(plan.n) + " M=" + std::to_string(plan.m) + " T=" + fmt(plan.t),
        "basin fractions: " + fr});
  return 0;
}

int cmd_oracle(const RunConfig& cfg, const Flags& flags, std::ostream& out) {
  const auto potential = build_potential(cfg);
  const auto ls = landscape_for(potential, cfg.alpha);
  const std::uint64_t hash = oracle_hash(cfg);
  Json written = Json::array();
  std::vector<std::string> lines;
  for (const double eps : eps_values(cfg)) {
    const fs::path dir = fixture_dir(cfg.fixtures_dir, cfg.potential, eps);
    Json gibbs;
    if (potential->minima().size() >= 2) {
      gibbs = to_json(gibbs_reference(ls, eps));
    } else {
      const auto z = grid_partition_function(*potential, eps);
      gibbs = {{"kind", "gibbs"}, {"eps", eps}, {"z", z.value}, {"well_masses", {1.0}}, {"mass_outside_k", 0.0}};
    }
    gibbs["potential"] = cfg.potential;
    gibbs["params"] = Json(cfg.potential_params);
    gibbs["alpha"] = cfg.alpha;
    write_fixture(dir / "gibbs.json", gibbs, hash);
    written.push_back((dir / "gibbs.json").string());
    std::string line = "eps=" + eps_label(eps) + " Z=" + fmt(gibbs["z"].get<double>());
    if (potential->dimension() <= 2) {
      SpectralOptions so;
      so.cells = cfg.nodes;
      so.n_modes = cfg.n_modes;
      const bool multi = potential->minima().size() >= 2;
      const auto spec = spectral_solve(*potential, eps, so, multi ? &ls : nullptr);
      Json sj = to_json(spec);
      sj["potential"] = cfg.potential;
      sj["params"] = Json(cfg.potential_params);
      sj["alpha"] = cfg.alpha;
      if (spec.coefficients.size() == 2) sj["flatness"] = eigenfunction_flatness(spec, ls);
      write_fixture(dir / "spectral.json", sj, hash);
      written.push_back((dir / "spectral.json").string());
      line += " lambda2=" + fmt(spec.eigenvalues[1]);
    }
    lines.push_back(line);
  }
  emit(out, flags, Json{{"fixtures", written}, {"config_hash", hex_hash(hash)}}, lines);
  return 0;
}

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Check> fixture_checks(const Json& gibbs, const Json* spectral) {
  std::vector<Check> checks;
  const auto masses = gibbs.at("well_masses").get<std::vector<double>>();
  double total = 0.0;
  bool nonneg = true;
  for (double m : masses) {
    total += m;
    nonneg = nonneg && m >= 0.0;
  }
  checks.push_back({"masses_nonnegative", nonneg, ""});
  checks.push_back({"masses_sum_at_most_one", total <= 1.0 + 1e-9, "sum=" + fmt(total)});
  checks.push_back({"partition_function_positive", gibbs.at("z").get<double>() > 0.0, ""});
  if (spectral) {
    const auto ev = spectral->at("eigenvalues").get<std::vector<double>>();
    const auto psi = spectral->at("psi2").get<std::vector<double>>();
    const auto mass = spectral->at("cell_mass").get<std::vector<double>>();
    bool ascending = true;
    for (std::size_t k = 1; k < ev.size(); ++k) ascending = ascending && ev[k] >= ev[k - 1];
    checks.push_back({"eigenvalues_ascending", ascending, ""});
    checks.push_back({"lambda1_zero", std::abs(ev[0]) <= 1e-8 * std::max(1.0, ev.back()), "lambda1=" + fmt(ev[0])});
    double norm = 0.0, mean = 0.0;
    for (std::size_t c = 0; c < psi.size(); ++c) {
      norm += psi[c] * psi[c] * mass[c];
      mean += psi[c] * mass[c];
    }
    checks.push_back({"psi2_normalized", std::abs(norm - 1.0) <= 1e-6, "norm=" + fmt(norm)});
    checks.push_back({"psi2_centered", std::abs(mean) <= 1e-6, "mean=" + fmt(mean)});
  }
  return checks;
}

int cmd_verify(const RunConfig& cfg, const Flags& flags, std::ostream& out) {
  const auto potential = build_potential(cfg);
  const auto ls = landscape_for(potential, cfg.alpha);
  const std::uint64_t hash = oracle_hash(cfg);
  std::vector<Check> checks;
  Json references;
  for (const double eps : eps_values(cfg)) {
    const fs::path dir = fixture_dir(cfg.fixtures_dir, cfg.potential, eps);
    const Json gibbs = load_fixture(dir / "gibbs.json", hash);
    Json spectral;
    const bool has_spectral = potential->dimension() <= 2;
    if (has_spectral) spectral = load_fixture(dir / "spectral.json", hash);
    for (auto c : fixture_checks(gibbs, has_spectral ? &spectral : nullptr)) {
      c.name = "eps=" + eps_label(eps) + ":" + c.name;
      checks.push_back(c);
    }
    references[eps_label(eps)] = gibbs.at("well_masses");
  }

  Json coverage;
  if (cfg.eta && potential->minima().size() >= 2) {
    const std::string key = eps_label(*cfg.eta);
    if (!references.contains(key)) {
      throw FixtureError("no fixture at eta = " + key + "; include it in eps_list and run the oracle subcommand");
    }
    const auto masses = references[key].get<std::vector<double>>();
    SamplerSetup setup;
    setup.potential = potential.get();
    setup.plan = plan_with_overrides(plan_inputs(cfg, ls), plan_overrides(cfg));
    setup.options = asmc_options(cfg);
    setup.init = cfg.init;
    std::vector<TestFunction> fns;
    std::vector<double> refs;
    for (std::size_t i = 0; i < masses.size(); ++i) {
      fns.push_back(basin_indicator(ls, i));
      refs.push_back(masses[i]);
    }
    const auto report = coverage_trial(setup, fns, refs, cfg.delta, cfg.theta, seed_range(cfg.seed_base, cfg.runs));
    checks.push_back({"coverage", report.pass,
                      "fraction=" + fmt(report.success_fraction) + " threshold=" + fmt(report.threshold)});
    coverage = to_json(report);
    coverage["plan"] = to_json(setup.plan);
    write_coverage_csv(fs::path(cfg.out_dir) / "coverage.csv", report);
  }

  bool all = true;
  Json jchecks = Json::array();
  std::vector<std::string> lines;
  for (const auto& c : checks) {
    all = all && c.pass;
    jchecks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    lines.push_back(std::string(c.pass ? "PASS " : "FAIL ") + c.name + (c.detail.empty() ? "" : " (" + c.detail + ")"));
  }
  lines.push_back(all ? "verify: all checks passed" : "verify: FAILED");
  Json doc{{"pass", all}, {"checks", jchecks}, {"config_hash", hex_hash(hash)}};
  if (!coverage.is_null()) doc["coverage"] = coverage;
  emit(out, flags, doc, lines);
  return all ? 0 : 1;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_bench(const RunConfig& cfg, const Flags& flags, std::ostream& out) {
  const auto potential = build_potential(cfg);
  const auto ls = landscape_for(potential, cfg.alpha);
  std::vector<double> etas = cfg.etas;
  if (etas.empty()) etas = {1.0 / 4, 1.0 / 6, 1.0 / 8, 1.0 / 12, 1.0 / 16, 1.0 / 24, 1.0 / 32};
  RunConfig sweep_cfg = cfg;
  if (!sweep_cfg.eta) sweep_cfg.eta = etas.front();
  PlanInputs base = plan_inputs(sweep_cfg, ls);
  const bool spectral = potential->dimension() <= 2 && potential->minima().size() >= 2;
  const auto table = complexity_sweep(ls, etas, base, spectral);
  Json doc{{"complexity", to_json(table)}};
  std::vector<std::string> lines{"budget slope (log MNT vs log 1/eta): " + fmt(table.budget_slope),
                                 "N slopes vs log 1/delta, log 1/theta: " + fmt(table.n_delta_slope) + ", " +
                                     fmt(table.n_theta_slope)};
  if (spectral) lines.push_back("spectral slope (log 1/lambda2 vs 1/eta): " + fmt(table.spectral_slope));

  if (cfg.eta && potential->minima().size() >= 2) {
    const double eta = *cfg.eta;
    const Plan plan = plan_with_overrides(plan_inputs(cfg, ls), plan_overrides(cfg));
    const auto h = basin_indicator(ls, 0);
    const double reference = gibbs_reference(ls, eta, {}, 3).well_masses[0];
    const auto& start = potential->minima().front().location;
    std::vector<double> asmc_err, base_err;
    AsmcOptions opts = asmc_options(cfg);
    BaselineOptions bo;
    bo.dt = cfg.dt;
    bo.thin = cfg.thin;
    bo.integrator = cfg.integrator;
    bo.guard_radius = cfg.guard_radius;
    for (const auto seed : seed_range(cfg.seed_base, cfg.baseline_seeds)) {
      opts.seed = seed;
      const auto init = initial_points(cfg.init, potential->dimension(), plan.n, seed);
      const auto r = run_asmc(*potential, plan, init, opts);
      asmc_err.push_back(mc_error(r.samples, r.dim, h.h, reference));
      base_err.push_back(baseline_direct_langevin(*potential, eta, r.steps, seed, h.h, reference, start, bo).error);
    }
    const double ma = median(asmc_err), mb = median(base_err);
    doc["baseline"] = {{"eta", eta},
                       {"reference", reference},
                       {"step_budget", plan.step_budget()},
                       {"asmc_errors", asmc_err},
                       {"baseline_errors", base_err},
                       {"median_asmc_error", ma},
                       {"median_baseline_error", mb},
                       {"separation", ma < mb / 3.0}};
    lines.push_back("median error ASMC " + fmt(ma) + " vs single chain " + fmt(mb));
  }
  emit(out, flags, doc, lines);
  return 0;
}

int cmd_calibrate(const RunConfig& cfg, const Flags& flags, std::ostream& out) {
  const auto potential = build_potential(cfg);
  const auto ls = landscape_for(potential, cfg.alpha);
  if (!cfg.eta) throw ConfigError("missing required key 'eta'");
  PlanInputs in = plan_inputs(cfg, ls);
  const std::size_t m = static_cast<std::size_t>(plan_bounds(in, 1, 1).m_min);
  if (cfg.start_n) {
    const double per_unit = plan_bounds(in, m, 1).n_min / in.constants.c_n;
    in.constants.c_n = static_cast<double>(*cfg.start_n) / per_unit;
  }
  if (cfg.start_t) {
    const auto n = static_cast<std::size_t>(std::ceil(plan_bounds(in, m, 1).n_min));
    const double per_unit = plan_bounds(in, m, n).t_min / in.constants.c_t;
    in.constants.c_t = *cfg.start_t / per_unit;
  }
  CalibrationSpec spec;
  spec.setup.potential = potential.get();
  spec.setup.plan.inputs = in;
  spec.setup.options = asmc_options(cfg);
  spec.setup.init = cfg.init;
  spec.fns = test_functions(cfg, ls);
  for (const auto& f : spec.fns) spec.references.push_back(reference_value(f, ls, *cfg.eta));
  spec.theta = cfg.theta;
  spec.runs = cfg.runs;
  spec.seed_base = cfg.seed_base;
  spec.iterations = cfg.iterations;
  spec.required_fraction = cfg.required;
  const auto result = calibrate_constants(spec);

  Json history = Json::array();
  for (const auto& s : result.history) {
    history.push_back({{"c_n", s.constants.c_n}, {"c_t", s.constants.c_t}, {"n", s.n}, {"t", s.t},
                       {"success_fraction", s.success_fraction}, {"pass", s.pass}});
  }
  Json doc{{"success", result.success},
           {"c_n", result.constants.c_n},
           {"c_t", result.constants.c_t},
           {"c_tem", result.constants.c_tem},
           {"history", history}};
  if (result.success) {
    doc["plan"] = to_json(result.plan);
    doc["report"] = to_json(result.report);
  }
  write_text_file(fs::path(cfg.out_dir) / "calibration.json", doc.dump(2) + "\n");
  write_coverage_csv(fs::path(cfg.out_dir) / "coverage.csv", result.report);
  emit(out, flags, doc,
       {std::string(result.success ? "calibrated" : "calibration failed") + ": c_n = " + fmt(result.constants.c_n) +
            " c_t = " + fmt(result.constants.c_t),
        result.success ? "N=" + std::to_string(result.plan.n) + " T=" + fmt(result.plan.t) : ""});
  return result.success ? 0 : 1;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << Json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Annealed sequential Monte Carlo for low-temperature Gibbs measures"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> descriptions{
      {"plan", "print the (M, N, T) plan and schedule as JSON"},
      {"sample", "run the sampler and write samples, trace and run record"},
      {"oracle", "write quadrature and spectral fixtures"},
      {"verify", "check fixtures and run the coverage trial against them"},
      {"bench", "complexity sweep and single-chain baseline"},
      {"calibrate", "search for cheap constants C_N, C_T passing the coverage trial"}};
  for (const auto& [name, text] : descriptions) {
    auto* sub = app.add_subcommand(name, text);
    sub->add_option("-c,--config", flags.config_path, "config file")->check(CLI::ExistingFile);
    sub->add_option("-s,--set", flags.sets, "override a config key (KEY=VALUE), repeatable");
    sub->add_flag("--json", flags.json, "print JSON to stdout");
    sub->add_option("--threads", flags.threads, "cap on worker threads (0 = runtime default)");
    sub->add_flag("--unsafe", flags.unsafe, "accept overrides below the plan bounds");
    sub->add_option("-o,--out", flags.out_dir, "output directory (default $ASMC_OUT_DIR or ./out)");
    sub->add_option("--seed", flags.seed, "random seed");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << version_string() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage_error", e.what());
    return 2;
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    const RunConfig cfg = load_config(flags, sub);
    kernels::set_thread_limit(cfg.threads);
    if (sub == "plan") return cmd_plan(cfg, flags, out);
    if (sub == "sample") return cmd_sample(cfg, flags, out);
    if (sub == "oracle") return cmd_oracle(cfg, flags, out);
    if (sub == "verify") return cmd_verify(cfg, flags, out);
    if (sub == "bench") return cmd_bench(cfg, flags, out);
    return cmd_calibrate(cfg, flags, out);
  } catch (const ConfigError& e) {
    report_error(err, e.kind(), e.what());
    return 2;
  } catch (const UsageError& e) {
    report_error(err, e.kind(), e.what());
    return 2;
  } catch (const Error& e) {
    report_error(err, e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error(err, "internal_error", e.what());
    return 1;
  }
}

}  // namespace asmc
