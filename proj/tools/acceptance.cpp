// Acceptance checks: one PASS/FAIL line per criterion.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "asmc/config.hpp"
#include "asmc/diagnostics.hpp"
#include "asmc/error.hpp"
#include "asmc/io.hpp"
#include "asmc/landscape.hpp"
#include "asmc/oracle.hpp"
#include "asmc/potential.hpp"
#include "asmc/rng.hpp"
#include "asmc/schedule.hpp"
#include "asmc/smc.hpp"

namespace fs = std::filesystem;
using namespace asmc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
};

fs::path g_configs = "configs";

std::string num(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

RunConfig load(const std::string& name) {
  return parse_config(read_text_file(g_configs / name), "verify");
}

SamplerSetup setup_for(const RunConfig& cfg, const Potential& u, const LandscapeSummary& ls) {
  SamplerSetup s;
  s.potential = &u;
  s.plan = plan_with_overrides(plan_inputs(cfg, ls), plan_overrides(cfg));
  s.options = asmc_options(cfg);
  s.init = cfg.init;
  return s;
}

double fraction_below(const CoverageReport& r, double tol) {
  std::size_t ok = 0;
  for (const auto& run : r.runs) ok += run.error < tol;
  return static_cast<double>(ok) / static_cast<double>(r.runs.size());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 1: symmetric quartic, indicator of the first well, reference 0.5.
Outcome symmetric_recovery() {
  const auto cfg = load("quartic.conf");
  const auto u = build_potential(cfg);
  const auto ls = landscape_summary(u, cfg.alpha);
  const auto setup = setup_for(cfg, *u, ls);
  const std::vector<TestFunction> fns{basin_indicator(ls, 0)};
  const std::vector<double> refs{0.5};
  const auto r = coverage_trial(setup, fns, refs, 0.05, 0.1, seed_range(1, 50));
  const double f = fraction_below(r, 0.05);
  return {f >= 0.85, "N=" + std::to_string(setup.plan.n) + " M=" + std::to_string(setup.plan.m) +
                         " T=" + num(setup.plan.t) + "; " + num(100 * f) + "% of 50 runs within 0.05 (need 85%)"};
}

// 2: tilted quartic well masses against quadrature at two resolutions.
Outcome tilted_masses() {
  const auto cfg = load("tilted_quartic.conf");
  const auto u = build_potential(cfg);
  const auto ls = landscape_summary(u, cfg.alpha);
  const double eta = *cfg.eta;
  QuadratureOptions coarse, fine;
  coarse.rel_tol = 1e-6;
  coarse.min_level = 6;
  fine.rel_tol = 1e-10;
  fine.min_level = 10;
  const auto a = gibbs_reference(ls, eta, coarse, 3);
  const auto b = gibbs_reference(ls, eta, fine, 3);
  double agree = 0.0;
  for (std::size_t i = 0; i < a.well_masses.size(); ++i) agree = std::max(agree, std::abs(a.well_masses[i] - b.well_masses[i]));

  const auto setup = setup_for(cfg, *u, ls);
  std::vector<TestFunction> fns;
  for (std::size_t i = 0; i < b.well_masses.size(); ++i) fns.push_back(basin_indicator(ls, i));
  const auto r = coverage_trial(setup, fns, b.well_masses, 0.05, 0.1, seed_range(1, 50));
  const double f = fraction_below(r, 0.05);
  return {agree < 1e-4 && f >= 0.85, "masses " + num(b.well_masses[0]) + "/" + num(b.well_masses[1]) +
                                         ", resolution gap " + num(agree) + " (need < 1e-4); " + num(100 * f) +
                                         "% of 50 runs within 0.05 (need 85%)"};
}

// 3: ASMC against one long Langevin chain with the same number of steps.
Outcome separation() {
  const auto cfg = load("quartic.conf");
  const auto u = build_potential(cfg);
  const auto ls = landscape_summary(u, cfg.alpha);
  const double eta = *cfg.eta;
  const auto setup = setup_for(cfg, *u, ls);
  const auto h = basin_indicator(ls, 0);
  const auto& start = u->minima().front().location;
  BaselineOptions bo;
  bo.dt = cfg.dt;
  bo.thin = cfg.thin;
  bo.integrator = cfg.integrator;
  bo.guard_radius = cfg.guard_radius;
  AsmcOptions opts = setup.options;
  std::vector<double> ea, eb;
  for (const auto seed : seed_range(1, 20)) {
    opts.seed = seed;
    const auto init = initial_points(setup.init, u->dimension(), setup.plan.n, seed);
    const auto r = run_asmc(*u, setup.plan, init, opts);
    ea.push_back(mc_error(r.samples, r.dim, h.h, 0.5));
    eb.push_back(baseline_direct_langevin(*u, eta, r.steps, seed, h.h, 0.5, start, bo).error);
  }
  const double ma = median(ea), mb = median(eb);
  return {ma < mb / 3.0, "median error ASMC " + num(ma) + " vs single chain " + num(mb) + " at " +
                             num(setup.plan.step_budget()) + " steps (need ratio < 1/3)"};
}

const std::vector<double> kEpsSweep{0.14, 0.12, 0.1, 0.08, 0.06};

// 4: Arrhenius slope, spectral gap and the OU spectrum.
Outcome spectral_structure() {
  const auto ls = landscape_summary(make_potential("quartic"), 1.0);
  std::vector<double> x, y;
  SpectralSummary last;
  for (double eps : kEpsSweep) {
    last = spectral_solve(*ls.potential, eps, {}, &ls);
    x.push_back(-1.0 / eps);
    y.push_back(std::log(last.eigenvalues[1]));
  }
  const double slope = fit_slope(x, y);
  const bool a = std::abs(slope - 1.0) < 0.15;
  const double ratio = last.eigenvalues[2] / last.eigenvalues[1];
  const bool b = ratio > 10.0;
  double ou = 0.0;
  const auto q = make_potential("quadratic");
  const auto s = spectral_solve(*q, 1.0);
  ou = std::abs(s.eigenvalues[0]);
  for (int k = 1; k < 4; ++k) ou = std::max(ou, std::abs(s.eigenvalues[k] - k) / k);
  const bool c = ou < 0.01;
  return {a && b && c, "slope " + num(slope) + " (need 1 +- 15%), lambda3/lambda2 " + num(ratio) +
                           " at eps=0.06 (need > 10), OU relative error " + num(ou) + " (need < 1%)"};
}

// 5: flatness of psi_2 on the wells and stability of sup_K |psi_2|.
Outcome flatness() {
  const auto ls = landscape_summary(make_potential("quartic"), 1.0);
  const auto s10 = spectral_solve(*ls.potential, 0.1, {}, &ls);
  const auto s06 = spectral_solve(*ls.potential, 0.06, {}, &ls);
  const double f10 = eigenfunction_flatness(s10, ls), f06 = eigenfunction_flatness(s06, ls);
  double lo = 1e300, hi = 0.0;
  for (double eps : {0.2, 0.14, 0.1, 0.08, 0.06}) {
    const auto s = spectral_solve(*ls.potential, eps, {}, &ls);
    lo = std::min(lo, s.c_psi);
    hi = std::max(hi, s.c_psi);
  }
  return {f06 < f10 && hi < 2.0 * lo, "flatness " + num(f10) + " at eps=0.1, " + num(f06) + " at eps=0.06; C_psi in [" +
                                          num(lo) + ", " + num(hi) + "] (need ratio < 2)"};
}

// 6: -eps log pi(K^c) against C_K.
Outcome mass_concentration() {
  const auto ls = landscape_summary(make_potential("quartic"), 1.0);
  bool ok = true;
  std::string detail;
  for (double eps : {0.1, 0.05}) {
    const auto ref = gibbs_reference(ls, eps, {}, 3);
    const double rate = -eps * std::log(ref.mass_outside_k);
    ok = ok && rate >= 0.75 * ls.c_k;
    detail += "eps=" + num(eps) + ": " + num(rate) + "; ";
  }
  return {ok, detail + "need >= 0.75 C_K = " + num(0.75 * ls.c_k)};
}

// 7: OU diagonal transition density and the quartic ratio over time.
Outcome transition_density() {
  const auto q = make_potential("quadratic");
  const double eps = 0.5, t = 0.5, x0 = 0.7;
  TransitionOptions o;
  o.n_runs = 20000;
  o.dt = 1e-3;
  o.seed = 7;
  const std::vector<double> at{x0};
  const auto est = transition_density_diagonal(*q, eps, t, at, o);
  const double var = eps * (1 - std::exp(-2 * t)) + est.bandwidth[0] * est.bandwidth[0];
  const double mean = x0 * std::exp(-t);
  const double exact = std::exp(-(x0 - mean) * (x0 - mean) / (2 * var)) / std::sqrt(2 * std::numbers::pi * var);
  const double ou_err = std::abs(est.density / exact - 1.0);

  const auto ls = landscape_summary(make_potential("quartic"), 1.0);
  const double e2 = 0.2;
  const double lambda2 = spectral_solve(*ls.potential, e2, {}, &ls).eigenvalues[1];
  const std::vector<double> times{0.1, 0.5, 1.0 / lambda2, 10.0 / lambda2};
  TransitionOptions oq;
  oq.n_runs = 20000;
  oq.seed = 7;
  const auto& xm = ls.potential->minima().front().location;
  const auto sweep = transition_density_sweep(*ls.potential, e2, times, xm, oq);
  bool decreasing = true;
  std::string ratios;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    if (i > 0) decreasing = decreasing && sweep[i].ratio < sweep[i - 1].ratio;
    ratios += (i ? "," : "") + num(sweep[i].ratio);
  }
  const double tail = std::abs(sweep.back().ratio - 1.0);
  return {ou_err < 0.05 && decreasing && tail < 0.1,
          "OU relative error " + num(ou_err) + " (need < 5%); quartic p/pi at t={0.1,0.5,1/l2,10/l2}: " + ratios +
              " (need decreasing, last within 10% of 1)"};
}

// 8: multinomial selection frequencies and the conditional expectation.
Outcome resampling() {
  ParticleEnsemble e(1, {-1.2, -0.3, 0.1, 0.8, 1.5});
  e.log_weights = {-0.4, -2.0, 0.3, -1.1, 0.0};
  const auto w = normalized_weights(e.log_weights);
  auto h = [](double x) { return std::tanh(2 * x) + 0.5 * x * x; };
  double exact = 0.0, second = 0.0;
  for (std::size_t j = 0; j < 5; ++j) {
    exact += w[j] * h(e.positions[j]);
    second += w[j] * h(e.positions[j]) * h(e.positions[j]);
  }
  const std::size_t draws = 100000;
  double acc = 0.0;
  std::vector<double> counts(5, 0.0);
  for (std::size_t r = 0; r < draws; ++r) {
    StreamRng rng({2024, static_cast<std::uint32_t>(r), kResampleStream});
    std::vector<std::size_t> off;
    const auto out = resample_multinomial(e, rng, &off);
    double m = 0.0;
    for (double x : out.positions) m += h(x);
    acc += m / 5.0;
    for (std::size_t j = 0; j < 5; ++j) counts[j] += static_cast<double>(off[j]);
  }
  const double total = 5.0 * draws;
  double worst = 0.0;
  for (std::size_t j = 0; j < 5; ++j) {
    worst = std::max(worst, std::abs(counts[j] - total * w[j]) / std::sqrt(total * w[j] * (1 - w[j])));
  }
  const double z = std::abs(acc / draws - exact) / std::sqrt((second - exact * exact) / 5.0 / draws);
  return {worst < 3.0 && z < 3.0, "largest frequency deviation " + num(worst) + " sigma, conditional mean " + num(z) +
                                      " sigma (need < 3)"};
}

// 9: planner budget slope and the spectral slope over eta.
Outcome complexity() {
  const auto cfg = load("quartic.conf");
  const auto u = build_potential(cfg);
  const auto ls = landscape_summary(u, 0.01);
  PlanInputs base = plan_inputs(cfg, ls);
  base.alpha = 0.01;
  base.budget_cap = std::numeric_limits<double>::infinity();
  const std::vector<double> etas{1.0 / 4, 1.0 / 6, 1.0 / 8, 1.0 / 12, 1.0 / 16, 1.0 / 24, 1.0 / 32};
  const auto table = complexity_sweep(ls, etas, base, true);
  bool feasible = true;
  for (const auto& row : table.rows) feasible = feasible && row.feasible;
  const bool a = feasible && table.budget_slope >= 1.0 && table.budget_slope <= 8.0;
  const bool b = std::abs(table.spectral_slope - ls.energy_barrier) < 0.2 * ls.energy_barrier;
  return {a && b, "budget slope " + num(table.budget_slope) + " (need [1, 8]), spectral slope " +
                      num(table.spectral_slope) + " (need " + num(ls.energy_barrier) + " +- 20%)"};
}

// 10: triple well spectrum and well masses.
Outcome multi_well() {
  const auto cfg = load("triple_well.conf");
  const auto u = build_potential(cfg);
  const auto ls = landscape_summary(u, cfg.alpha);
  const auto s = spectral_solve(*u, 0.1, {0, 5}, &ls);
  std::size_t small = 0;
  for (std::size_t k = 1; k < s.eigenvalues.size(); ++k) small += s.eigenvalues[k] < 0.01 * s.gap;

  const auto ref = gibbs_reference(ls, *cfg.eta, {}, 3);
  const auto setup = setup_for(cfg, *u, ls);
  std::vector<TestFunction> fns;
  for (std::size_t i = 0; i < ref.well_masses.size(); ++i) fns.push_back(basin_indicator(ls, i));
  const auto r = coverage_trial(setup, fns, ref.well_masses, 0.07, 0.2, seed_range(1, 30));
  const double f = fraction_below(r, 0.07);
  return {small == 2 && f >= 0.8, std::to_string(small) + " eigenvalues below gap/100 (need 2); " + num(100 * f) +
                                      "% of 30 runs within 0.07 (need 80%)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  std::string configs = (fs::path(ASMC_SOURCE_DIR) / "configs").string();
  app.add_option("--only", only, "Criteria to run (default all)")->check(CLI::Range(1, 10));
  app.add_option("--configs", configs, "Directory holding the *.conf files");
  CLI11_PARSE(app, argc, argv);
  g_configs = configs;

  const std::vector<Criterion> all{
      {1, "symmetric-well recovery", symmetric_recovery},
      {2, "nearly-equal-depth wells", tilted_masses},
      {3, "metastability separation", separation},
      {4, "spectral structure", spectral_structure},
      {5, "eigenfunction flatness", flatness},
      {6, "mass concentration", mass_concentration},
      {7, "transition-density bound", transition_density},
      {8, "resampling exactness", resampling},
      {9, "complexity scaling", complexity},
      {10, "multi-well", multi_well},
  };
  const std::set<int> wanted(only.begin(), only.end());
  bool ok = true;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ok = ok && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " " << c.name << ": " << o.detail << " ["
              << num(secs) << " s]" << std::endl;
  }
  return ok ? 0 : 1;
}
