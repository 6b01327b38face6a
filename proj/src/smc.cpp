#include "asmc/smc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "asmc/error.hpp"

namespace asmc {

ParticleEnsemble::ParticleEnsemble(std::size_t d, std::vector<double> flat_positions, std::size_t k)
    : dim(d), level(k), positions(std::move(flat_positions)) {
  if (d == 0 || positions.size() % d != 0) {
    throw DimensionMismatch("ensemble storage is not a multiple of the dimension");
  }
  log_weights.assign(positions.size() / d, 0.0);
}

double log_weight(const Potential& potential, double eta_cur, double eta_next, std::span<const double> x) {
  if (!(eta_next > 0.0) || !(eta_cur > 0.0)) throw InvalidArgument("log_weight: temperatures must be positive");
  if (eta_next > eta_cur) throw InvalidArgument("log_weight: eta_next must not exceed eta_cur");
  return -(1.0 / eta_next - 1.0 / eta_cur) * potential.energy(x);
}

std::vector<double> normalized_weights(std::span<const double> log_weights) {
  if (log_weights.empty()) throw InvalidArgument("normalized_weights: empty weight vector");
  double top = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) {
    if (std::isnan(lw)) throw WeightCollapse("log-weight is NaN");
    top = std::max(top, lw);
  }
  if (!std::isfinite(top)) throw WeightCollapse("all weights vanish");
  std::vector<double> w(log_weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(log_weights[i] - top);
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

double effective_sample_size(std::span<const double> log_weights) {
  const auto w = normalized_weights(log_weights);
  double sq = 0.0;
  for (double v : w) sq += v * v;
  return 1.0 / sq;
}

Resampler parse_resampler(const std::string& name) {
  if (name == "multinomial") return Resampler::kMultinomial;
  if (name == "systematic") return Resampler::kSystematic;
  throw ConfigError("unknown resampler '" + name + "'; valid: multinomial, systematic");
}

std::string to_string(Resampler resampler) {
  return resampler == Resampler::kMultinomial ? "multinomial" : "systematic";
}

namespace {

std::vector<double> cumulative(std::span<const double> log_weights) {
  auto w = normalized_weights(log_weights);
  for (std::size_t i = 1; i < w.size(); ++i) w[i] += w[i - 1];
  return w;
}

std::size_t locate(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back());
  const auto j = static_cast<std::size_t>(it - cdf.begin());
  return std::min(j, cdf.size() - 1);
}

}  // namespace

std::vector<std::size_t> multinomial_indices(std::span<const double> log_weights, std::size_t count,
                                             StreamRng& rng) {
  const auto cdf = cumulative(log_weights);
  std::vector<std::size_t> out(count);
  for (auto& j : out) j = locate(cdf, rng.uniform());
  return out;
}

std::vector<std::size_t> systematic_indices(std::span<const double> log_weights, std::size_t count,
                                            StreamRng& rng) {
  const auto cdf = cumulative(log_weights);
  std::vector<std::size_t> out(count);
  const double offset = rng.uniform();
  std::size_t j = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double u = (static_cast<double>(i) + offset) / static_cast<double>(count) * cdf.back();
    while (j + 1 < cdf.size() && cdf[j] <= u) ++j;
    out[i] = j;
  }
  return out;
}

std::vector<std::size_t> offspring_counts(std::span<const std::size_t> indices, std::size_t parents) {
  std::vector<std::size_t> counts(parents, 0);
  for (std::size_t j : indices) {
    if (j >= parents) throw InvalidArgument("offspring_counts: index out of range");
    ++counts[j];
  }
  return counts;
}

ParticleEnsemble resample_multinomial(const ParticleEnsemble& ensemble, StreamRng& rng,
                                      std::vector<std::size_t>* offspring) {
  const std::size_t n = ensemble.size();
  if (ensemble.log_weights.size() != n) throw DimensionMismatch("resample: one log-weight per particle required");
  const auto idx = multinomial_indices(ensemble.log_weights, n, rng);
  ParticleEnsemble out;
  out.dim = ensemble.dim;
  out.level = ensemble.level;
  out.positions.resize(ensemble.positions.size());
  out.log_weights.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = ensemble.point(idx[i]);
    std::copy(src.begin(), src.end(), out.positions.begin() + static_cast<std::ptrdiff_t>(i * ensemble.dim));
  }
  if (offspring) *offspring = offspring_counts(idx, n);
  return out;
}

InitKind parse_init(const std::string& name) {
  if (name == "cube") return InitKind::kCube;
  if (name == "origin") return InitKind::kOrigin;
  throw ConfigError("unknown init '" + name + "'; valid: cube, origin");
}

std::string to_string(InitKind kind) { return kind == InitKind::kCube ? "cube" : "origin"; }

std::vector<double> initial_points(InitKind kind, std::size_t dim, std::size_t n, std::uint64_t seed) {
  std::vector<double> x(dim * n, 0.0);
  if (kind == InitKind::kOrigin) return x;
  for (std::size_t i = 0; i < n; ++i) {
    StreamRng rng({seed, 0, static_cast<std::uint32_t>(i)});
    for (std::size_t j = 0; j < dim; ++j) x[i * dim + j] = 2.0 * rng.uniform() - 1.0;
  }
  return x;
}

namespace {

void record_classes(LevelRecord& rec, const LandscapeSummary& landscape, kernels::Execution exec,
                    std::span<const double> positions, std::size_t n) {
  const auto c = kernels::classify(exec, landscape, positions);
  rec.basin_fraction.assign(landscape.potential->minima().size(), 0.0);
  std::size_t in_k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    rec.basin_fraction[c.basin[i]] += 1.0;
    in_k += c.in_k[i];
  }
  for (double& f : rec.basin_fraction) f /= static_cast<double>(n);
  rec.in_k_fraction = static_cast<double>(in_k) / static_cast<double>(n);
}

}  // namespace

AsmcResult run_asmc(const Potential& potential, const AnnealSchedule& schedule, std::size_t n, double t,
                    std::span<const double> init_points, const AsmcOptions& options) {
  const std::size_t d = potential.dimension();
  const std::size_t m = schedule.size();
  if (m == 0) throw InvalidArgument("run_asmc: empty schedule");
  if (n == 0) throw InvalidArgument("run_asmc: N must be positive");
  if (n > std::numeric_limits<std::uint32_t>::max() - 1u) throw InvalidArgument("run_asmc: N too large");
  if (init_points.size() != n * d) {
    throw DimensionMismatch("run_asmc: expected " + std::to_string(n) + " initial points of dimension " +
                            std::to_string(d));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double u = potential.energy(init_points.subspan(i * d, d));
    if (!(u <= options.c_ini)) {
      throw InvalidArgument("run_asmc: initial point " + std::to_string(i) + " has U = " + std::to_string(u) +
                            " above C_ini = " + std::to_string(options.c_ini));
    }
  }

  LangevinParams lp;
  lp.total_time = t;
  lp.dt = options.dt;
  lp.guard_radius = options.guard_radius;
  lp.integrator = options.integrator;
  lp.temperature = schedule.eta(1);
  lp.validate();
  const double steps = static_cast<double>(n) * static_cast<double>(m) * static_cast<double>(lp.step_count());
  if (steps > options.budget_cap) {
    throw BudgetExceeded("run_asmc: " + std::to_string(steps) + " Langevin steps exceed the cap " +
                         std::to_string(options.budget_cap));
  }

  AsmcResult result;
  result.dim = d;
  result.steps = steps;
  std::vector<double> x(init_points.begin(), init_points.end());
  std::vector<double> next(x.size());
  std::vector<double> lw(n);

  for (std::size_t k = 1; k <= m; ++k) {
    const auto start = std::chrono::steady_clock::now();
    LevelRecord rec;
    rec.level = k;
    rec.eta = schedule.eta(k);
    lp.temperature = rec.eta;
    kernels::propagate(options.execution, potential, x, lp, options.seed, static_cast<std::uint32_t>(k));
    if (options.landscape) record_classes(rec, *options.landscape, options.execution, x, n);

    if (k < m) {
      kernels::log_weights(options.execution, potential, x, rec.eta, schedule.eta(k + 1), lw);
      rec.ess = effective_sample_size(lw);
      StreamRng rng({options.seed, static_cast<std::uint32_t>(k), kResampleStream});
      const auto idx = options.resampler == Resampler::kMultinomial ? multinomial_indices(lw, n, rng)
                                                                    : systematic_indices(lw, n, rng);
      const auto counts = offspring_counts(idx, n);
      rec.resample_max_count = *std::max_element(counts.begin(), counts.end());
      rec.offspring_histogram.assign(rec.resample_max_count + 1, 0);
      for (std::size_t c : counts) ++rec.offspring_histogram[c];
      for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(idx[i] * d), d,
                    next.begin() + static_cast<std::ptrdiff_t>(i * d));
      }
      x.swap(next);
    } else {
      rec.ess = static_cast<double>(n);
    }
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (options.on_level) options.on_level(rec);
    result.trace.levels.push_back(std::move(rec));
  }
  result.samples = std::move(x);
  return result;
}

AsmcResult run_asmc(const Potential& potential, const Plan& plan, std::span<const double> init_points,
                    AsmcOptions options) {
  options.dt = plan.inputs.dt;
  options.budget_cap = plan.inputs.budget_cap;
  return run_asmc(potential, plan.schedule, plan.n, plan.t, init_points, options);
}

}  // namespace asmc
