#ifndef ASMC_SMC_HPP
#define ASMC_SMC_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "asmc/dynamics.hpp"
#include "asmc/kernels.hpp"
#include "asmc/landscape.hpp"
#include "asmc/potential.hpp"
#include "asmc/rng.hpp"
#include "asmc/schedule.hpp"

namespace asmc {

/// N particles in R^d stored flat, with their current log-weights.
struct ParticleEnsemble {
  std::size_t dim = 1;
  std::size_t level = 1;
  std::vector<double> positions;
  std::vector<double> log_weights;

  ParticleEnsemble() = default;
  ParticleEnsemble(std::size_t d, std::vector<double> flat_positions, std::size_t k = 1);

  std::size_t size() const noexcept { return dim == 0 ? 0 : positions.size() / dim; }
  std::span<const double> point(std::size_t i) const { return {positions.data() + i * dim, dim}; }
  std::span<double> point(std::size_t i) { return {positions.data() + i * dim, dim}; }
};

/// log of the unnormalized density ratio exp(-U/eta_next) / exp(-U/eta_cur) at x,
/// i.e. -(1/eta_next - 1/eta_cur) U(x). Requires eta_next <= eta_cur.
double log_weight(const Potential& potential, double eta_cur, double eta_next, std::span<const double> x);

/// Normalized probabilities from log-weights via max-subtracted exponentiation.
/// Throws WeightCollapse when no weight is finite.
std::vector<double> normalized_weights(std::span<const double> log_weights);

/// (sum w)^2 / sum w^2, in [1, N].
double effective_sample_size(std::span<const double> log_weights);

enum class Resampler { kMultinomial, kSystematic };
Resampler parse_resampler(const std::string& name);
std::string to_string(Resampler resampler);

/// `count` independent draws of an index j with probability w_j / sum w.
std::vector<std::size_t> multinomial_indices(std::span<const double> log_weights, std::size_t count,
                                             StreamRng& rng);
/// Systematic resampling: one uniform offset, stratified positions.
std::vector<std::size_t> systematic_indices(std::span<const double> log_weights, std::size_t count,
                                            StreamRng& rng);

/// Offspring count of every parent for a vector of selected indices.
std::vector<std::size_t> offspring_counts(std::span<const std::size_t> indices, std::size_t parents);

/// Multinomial resampling of the ensemble by its log-weights. The result holds
/// the selected positions with log-weights reset to zero. When `offspring` is
/// non-null it receives the per-parent selection counts.
ParticleEnsemble resample_multinomial(const ParticleEnsemble& ensemble, StreamRng& rng,
                                      std::vector<std::size_t>* offspring = nullptr);

struct LevelRecord {
  std::size_t level = 0;
  double eta = 0.0;
  /// ESS of the weights towards the next level (N at the last level).
  double ess = 0.0;
  std::vector<double> basin_fraction;  ///< empty without a landscape
  double in_k_fraction = std::numeric_limits<double>::quiet_NaN();
  /// histogram[c] = number of parents with c offspring (empty at the last level).
  std::vector<std::size_t> offspring_histogram;
  std::size_t resample_max_count = 0;
  double wall_ms = 0.0;
};

struct RunTrace {
  std::vector<LevelRecord> levels;
};

enum class InitKind { kCube, kOrigin };
InitKind parse_init(const std::string& name);
std::string to_string(InitKind kind);

/// N starting points: i.i.d. uniform on [-1, 1]^d (stream level 0) or all at the origin.
std::vector<double> initial_points(InitKind kind, std::size_t dim, std::size_t n, std::uint64_t seed);

struct AsmcOptions {
  std::uint64_t seed = 0;
  double dt = 1e-2;
  double guard_radius = 1e6;
  Integrator integrator = Integrator::kUla;
  Resampler resampler = Resampler::kMultinomial;
  kernels::Execution execution = kernels::Execution::kParallel;
  /// Starting points must satisfy max U <= c_ini.
  double c_ini = std::numeric_limits<double>::infinity();
  double budget_cap = std::numeric_limits<double>::infinity();
  /// Enables basin / K fractions in the trace.
  const LandscapeSummary* landscape = nullptr;
  /// Called after each level completes (for streaming traces to disk).
  std::function<void(const LevelRecord&)> on_level;
};

struct AsmcResult {
  std::size_t dim = 1;
  std::vector<double> samples;  ///< N x d, row-major
  RunTrace trace;
  double steps = 0.0;  ///< Langevin steps taken across all particles

  std::size_t size() const noexcept { return samples.size() / dim; }
};

/// Annealed SMC: for k = 1..M-1 simulate each particle at eta_k for time T,
/// weight by exp(-(1/eta_{k+1} - 1/eta_k) U) and resample; then simulate at
/// eta_M for time T and return the particles. Deterministic given the seed and
/// independent of the thread count.
AsmcResult run_asmc(const Potential& potential, const AnnealSchedule& schedule, std::size_t n, double t,
                    std::span<const double> init_points, const AsmcOptions& options);

/// Convenience overload taking (schedule, N, T, dt, budget cap) from a plan.
AsmcResult run_asmc(const Potential& potential, const Plan& plan, std::span<const double> init_points,
                    AsmcOptions options);

}  // namespace asmc

#endif  // ASMC_SMC_HPP
