#include "asmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "asmc/error.hpp"

namespace asmc {

TestFunction basin_indicator(const LandscapeSummary& landscape, std::size_t i) {
  if (i >= landscape.potential->minima().size()) throw InvalidArgument("basin_indicator: no such basin");
  const LandscapeSummary* ls = &landscape;
  return {"basin_" + std::to_string(i + 1),
          [ls, i](std::span<const double> x) { return ls->basin_of(x) == i ? 1.0 : 0.0; }, 1.0};
}

TestFunction tanh_first_coordinate() {
  return {"tanh_x1", [](std::span<const double> x) { return std::tanh(x[0]); }, 2.0};
}

TestFunction k_indicator(const LandscapeSummary& landscape) {
  const LandscapeSummary* ls = &landscape;
  return {"in_k", [ls](std::span<const double> x) { return ls->in_k(x) ? 1.0 : 0.0; }, 1.0};
}

TestFunction make_test_function(const std::string& name, const LandscapeSummary& landscape) {
  if (name == "tanh_x1") return tanh_first_coordinate();
  if (name == "in_k") return k_indicator(landscape);
  if (name.rfind("basin_", 0) == 0) {
    try {
      const auto i = std::stoul(name.substr(6));
      if (i >= 1) return basin_indicator(landscape, i - 1);
    } catch (const std::logic_error&) {
    }
  }
  throw ConfigError("unknown test function '" + name + "'; valid: basin_<i>, tanh_x1, in_k");
}

double reference_value(const TestFunction& fn, const LandscapeSummary& landscape, double eps) {
  if (fn.name == "in_k") return 1.0 - gibbs_reference(landscape, eps, {}, 3).mass_outside_k;
  if (fn.name.rfind("basin_", 0) == 0) {
    const auto i = std::stoul(fn.name.substr(6)) - 1;
    return gibbs_reference(landscape, eps, {}, 3).well_masses.at(i);
  }
  QuadratureOptions opts;
  opts.rel_tol = 1e-8;
  return grid_expectation(*landscape.potential, eps, fn.h, opts).value;
}

double sample_mean(std::span<const double> samples, std::size_t dim, const TestFn& h) {
  const std::size_t n = dim == 0 ? 0 : samples.size() / dim;
  if (n == 0) throw InvalidArgument("sample mean of an empty sample");
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += h(samples.subspan(i * dim, dim));
  return s / static_cast<double>(n);
}

double mc_error(std::span<const double> samples, std::size_t dim, const TestFn& h, double reference) {
  return std::abs(sample_mean(samples, dim, h) - reference);
}

double coverage_threshold(double theta, std::size_t runs) {
  return (1.0 - theta) - 1.645 * std::sqrt(theta * (1.0 - theta) / static_cast<double>(runs));
}

CoverageReport make_coverage_report(std::span<const std::uint64_t> seeds, std::span<const double> errors,
                                    double delta, double theta) {
  if (seeds.size() != errors.size()) throw DimensionMismatch("coverage report: one error per seed required");
  if (seeds.empty()) throw InvalidArgument("coverage report: no runs");
  CoverageReport r;
  r.delta = delta;
  r.theta = theta;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const bool ok = errors[i] < delta;
    hits += ok;
    r.runs.push_back({seeds[i], errors[i], ok});
  }
  std::sort(r.runs.begin(), r.runs.end(), [](const auto& a, const auto& b) { return a.seed < b.seed; });
  r.success_fraction = static_cast<double>(hits) / static_cast<double>(seeds.size());
  r.threshold = coverage_threshold(theta, seeds.size());
  r.pass = r.success_fraction >= r.threshold;
  return r;
}

CoverageReport coverage_trial(const SamplerSetup& setup, std::span<const TestFunction> fns,
                              std::span<const double> references, double delta, double theta,
                              std::span<const std::uint64_t> seeds) {
  if (!setup.potential) throw InvalidArgument("coverage_trial: no potential");
  if (fns.size() != references.size() || fns.empty()) {
    throw InvalidArgument("coverage_trial: one reference per test function required");
  }
  const std::size_t d = setup.potential->dimension();
  std::vector<double> errors;
  for (const auto seed : seeds) {
    try {
      auto opts = setup.options;
      opts.seed = seed;
      const auto init = initial_points(setup.init, d, setup.plan.n, seed);
      const auto result = run_asmc(*setup.potential, setup.plan, init, opts);
      double worst = 0.0;
      for (std::size_t f = 0; f < fns.size(); ++f) {
        worst = std::max(worst, mc_error(result.samples, d, fns[f].h, references[f]) / fns[f].osc);
      }
      errors.push_back(worst);
    } catch (const Error& e) {
      throw Error(e.kind(), "run with seed " + std::to_string(seed) + ": " + e.what());
    }
  }
  return make_coverage_report(seeds, errors, delta, theta);
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, std::size_t count) {
  std::vector<std::uint64_t> s(count);
  for (std::size_t i = 0; i < count; ++i) s[i] = base + i;
  return s;
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("fit_slope: need two or more paired values");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("fit_slope: x values are all equal");
  return sxy / sxx;
}

ComplexityTable complexity_sweep(const LandscapeSummary& landscape, std::span<const double> etas,
                                 const PlanInputs& base, bool spectral) {
  ComplexityTable table;
  std::vector<double> lx, ly, sx, sy;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (i > 0 && !(etas[i] < etas[i - 1])) throw InvalidArgument("complexity_sweep: etas must be decreasing");
    ComplexityRow row;
    row.eta = etas[i];
    PlanInputs in = base;
    in.eta = etas[i];
    in.barrier_ratio = landscape.barrier_ratio;
    in.c_k = landscape.c_k;
    try {
      const Plan plan = plan_parameters(in);
      row.m = plan.m;
      row.n = plan.n;
      row.t = plan.t;
      row.work = plan.work();
    } catch (const Error& e) {
      row.feasible = false;
      row.note = e.what();
    }
    if (row.feasible) {
      lx.push_back(std::log(1.0 / row.eta));
      ly.push_back(std::log(row.work));
    }
    if (spectral) {
      const auto s = spectral_solve(*landscape.potential, row.eta, {});
      row.lambda2 = s.eigenvalues[1];
      sx.push_back(1.0 / row.eta);
      sy.push_back(-std::log(row.lambda2));
    }
    table.rows.push_back(std::move(row));
  }
  if (lx.size() >= 2) table.budget_slope = fit_slope(lx, ly);
  if (sx.size() >= 2) table.spectral_slope = fit_slope(sx, sy);
  if (!etas.empty()) {
    PlanInputs in = base;
    in.eta = etas.front();
    in.barrier_ratio = landscape.barrier_ratio;
    in.c_k = landscape.c_k;
    in.budget_cap = std::numeric_limits<double>::infinity();
    std::vector<double> dx, dy, tx, ty;
    for (int j = 0; j < 4; ++j) {
      const double f = std::ldexp(1.0, -j);
      PlanInputs a = in, b = in;
      a.delta *= f;
      b.theta *= f;
      dx.push_back(std::log(1.0 / a.delta));
      dy.push_back(std::log(static_cast<double>(plan_parameters(a).n)));
      tx.push_back(std::log(1.0 / b.theta));
      ty.push_back(std::log(static_cast<double>(plan_parameters(b).n)));
    }
    table.n_delta_slope = fit_slope(dx, dy);
    table.n_theta_slope = fit_slope(tx, ty);
  }
  return table;
}

BaselineResult baseline_direct_langevin(const Potential& potential, double eta, double step_budget,
                                        std::uint64_t seed, const TestFn& h, double reference,
                                        std::span<const double> start, const BaselineOptions& opts) {
  const std::size_t d = potential.dimension();
  if (start.size() != d) throw DimensionMismatch("baseline: wrong start dimension");
  if (opts.thin == 0) throw InvalidArgument("baseline: thin must be positive");
  if (!(step_budget >= 0.0)) throw InvalidArgument("baseline: budget must be non-negative");
  Point x(start.begin(), start.end());
  const auto chunks = static_cast<std::size_t>(std::floor(step_budget / static_cast<double>(opts.thin)));
  if (chunks >= std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("baseline: budget too large");
  LangevinParams lp;
  lp.temperature = eta;
  lp.dt = opts.dt;
  lp.total_time = opts.dt * static_cast<double>(opts.thin);
  lp.integrator = opts.integrator;
  lp.guard_radius = opts.guard_radius;
  lp.validate();
  Point work(3 * d);
  BaselineResult r;
  double sum = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    simulate_in_place(potential, x, lp, {seed, static_cast<std::uint32_t>(c), 0}, work);
    sum += h(x);
  }
  if (chunks == 0) {
    sum = h(start);
    r.samples = 1;
  } else {
    r.samples = chunks;
  }
  r.steps = static_cast<double>(chunks * opts.thin);
  r.mean = sum / static_cast<double>(r.samples);
  r.error = std::abs(r.mean - reference);
  return r;
}

namespace {

struct Evaluation {
  bool pass = false;
  Plan plan;
  CoverageReport report;
};

Evaluation evaluate(const CalibrationSpec& spec, const PlanConstants& c, CalibrationResult& out) {
  Evaluation ev;
  PlanInputs in = spec.setup.plan.inputs;
  in.constants = c;
  CalibrationStep step;
  step.constants = c;
  try {
    ev.plan = plan_parameters(in);
    step.n = ev.plan.n;
    step.t = ev.plan.t;
    if (ev.plan.t < in.dt) {
      step.pass = false;
      out.history.push_back(step);
      return ev;
    }
    SamplerSetup setup = spec.setup;
    setup.plan = ev.plan;
    const auto seeds = seed_range(spec.seed_base, spec.runs);
    ev.report = coverage_trial(setup, spec.fns, spec.references, in.delta, spec.theta, seeds);
    const double need = spec.required_fraction >= 0.0 ? spec.required_fraction : ev.report.threshold;
    ev.pass = ev.report.success_fraction >= need;
    step.success_fraction = ev.report.success_fraction;
  } catch (const BudgetExceeded&) {
    throw;
  } catch (const InvalidArgument&) {
    ev.pass = false;
  }
  step.pass = ev.pass;
  out.history.push_back(step);
  return ev;
}

// C_T giving time t once N follows from C_N.
double c_t_for(const PlanInputs& base, const PlanConstants& c, double t) {
  PlanInputs in = base;
  in.constants = c;
  in.constants.c_t = 1.0;
  const auto m = static_cast<std::size_t>(plan_bounds(in, 1, 1).m_min);
  const auto n = static_cast<std::size_t>(std::ceil(plan_bounds(in, m, 1).n_min));
  return t / plan_bounds(in, m, std::max<std::size_t>(n, 1)).t_min;
}

}  // namespace

CalibrationResult calibrate_constants(const CalibrationSpec& spec) {
  if (spec.runs == 0) throw InvalidArgument("calibrate: runs must be positive");
  const PlanInputs& base = spec.setup.plan.inputs;
  CalibrationResult out;
  PlanConstants c = base.constants;
  double t = c.c_t / c_t_for(base, c, 1.0);  // starting T
  Evaluation best;
  try {
    best = evaluate(spec, c, out);
    for (int g = 0; !best.pass && g < spec.max_growth; ++g) {
      c.c_n *= spec.growth;
      t *= spec.growth;
      c.c_t = c_t_for(base, c, t);
      best = evaluate(spec, c, out);
    }
  } catch (const BudgetExceeded&) {
    best.pass = false;
  }
  if (!best.pass) {
    out.constants = c;
    return out;
  }
  // C_N first with T held fixed, then C_T at the chosen N.
  double hi = c.c_n, lo = hi / 1000.0;
  for (int it = 0; it < spec.iterations; ++it) {
    PlanConstants trial = c;
    trial.c_n = std::sqrt(lo * hi);
    trial.c_t = c_t_for(base, trial, t);
    const auto ev = evaluate(spec, trial, out);
    if (ev.pass) {
      hi = trial.c_n;
      best = ev;
    } else {
      lo = trial.c_n;
    }
  }
  c.c_n = hi;
  c.c_t = c_t_for(base, c, t);
  hi = c.c_t;
  lo = hi / 1000.0;
  for (int it = 0; it < spec.iterations; ++it) {
    PlanConstants trial = c;
    trial.c_t = std::sqrt(lo * hi);
    const auto ev = evaluate(spec, trial, out);
    if (ev.pass) {
      hi = trial.c_t;
      best = ev;
    } else {
      lo = trial.c_t;
    }
  }
  c.c_t = hi;
  out.constants = c;
  out.plan = best.plan;
  out.report = best.report;
  out.success = true;
  return out;
}

}  // namespace asmc
