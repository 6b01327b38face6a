#ifndef ASMC_DIAGNOSTICS_HPP
#define ASMC_DIAGNOSTICS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "asmc/landscape.hpp"
#include "asmc/oracle.hpp"
#include "asmc/schedule.hpp"
#include "asmc/smc.hpp"

namespace asmc {

/// Bounded test function with its oscillation sup h - inf h.
struct TestFunction {
  std::string name;
  TestFn h;
  double osc = 1.0;
};

/// Indicator of the basin of minimum i (0-based), named "basin_<i+1>".
TestFunction basin_indicator(const LandscapeSummary& landscape, std::size_t i);
/// tanh of the first coordinate, named "tanh_x1".
TestFunction tanh_first_coordinate();
/// Indicator of K, named "in_k".
TestFunction k_indicator(const LandscapeSummary& landscape);
/// Looks up a canonical test function by name ("basin_<i>", "tanh_x1", "in_k").
TestFunction make_test_function(const std::string& name, const LandscapeSummary& landscape);

/// int h dpi_eps from the oracle. Basin and K indicators use the piecewise
/// quadrature of gibbs_reference; other functions use grid_expectation.
double reference_value(const TestFunction& fn, const LandscapeSummary& landscape, double eps);

double sample_mean(std::span<const double> samples, std::size_t dim, const TestFn& h);
/// |N^-1 sum h(x_i) - reference|. Throws InvalidArgument for an empty sample.
double mc_error(std::span<const double> samples, std::size_t dim, const TestFn& h, double reference);

struct CoverageRun {
  std::uint64_t seed = 0;
  /// max over test functions of |mean - reference| / osc
  double error = 0.0;
  bool success = false;
};

struct CoverageReport {
  std::vector<CoverageRun> runs;
  double delta = 0.0;
  double theta = 0.0;
  double success_fraction = 0.0;
  /// (1 - theta) minus the one-sided 95% binomial slack.
  double threshold = 0.0;
  bool pass = false;
};

/// (1 - theta) - 1.645 sqrt(theta (1 - theta) / runs)
double coverage_threshold(double theta, std::size_t runs);

/// Assembles a report from per-run normalized errors; success means error < delta.
/// Runs are listed in seed order.
CoverageReport make_coverage_report(std::span<const std::uint64_t> seeds, std::span<const double> errors, double delta,
                                    double theta);

/// What a batch of sampler runs needs besides the seed.
struct SamplerSetup {
  const Potential* potential = nullptr;
  Plan plan;
  AsmcOptions options;
  InitKind init = InitKind::kCube;
};

/// One sampler run per seed; every test function is compared with its
/// reference. Failures are rethrown with the seed in the message.
CoverageReport coverage_trial(const SamplerSetup& setup, std::span<const TestFunction> fns,
                              std::span<const double> references, double delta, double theta,
                              std::span<const std::uint64_t> seeds);

/// Seeds base, base + 1, ...
std::vector<std::uint64_t> seed_range(std::uint64_t base, std::size_t count);

struct ComplexityRow {
  double eta = 0.0;
  bool feasible = true;
  std::string note;
  std::size_t m = 0;
  std::size_t n = 0;
  double t = 0.0;
  double work = 0.0;     ///< M N T
  double lambda2 = 0.0;  ///< 0 when the spectral proxy is disabled
};

struct ComplexityTable {
  std::vector<ComplexityRow> rows;
  /// Least-squares slope of log(M N T) against log(1/eta).
  double budget_slope = 0.0;
  /// Least-squares slope of log(1/lambda_2) against 1/eta.
  double spectral_slope = 0.0;
  /// Slopes of log N against log(1/delta) and log(1/theta) at the first eta,
  /// over delta / 2^j and theta / 2^j, j = 0..3. The planner gives about 2 and
  /// a small log-type value; a delta^-2 theta^-2 law would give 2 and 2.
  double n_delta_slope = 0.0;
  double n_theta_slope = 0.0;
};

/// Plans every eta (skipping infeasible ones with a note) and fits the slopes.
/// `base` provides all plan inputs except eta; barrier ratio and C_K come from
/// the landscape.
ComplexityTable complexity_sweep(const LandscapeSummary& landscape, std::span<const double> etas,
                                 const PlanInputs& base, bool spectral = true);

/// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

struct BaselineOptions {
  double dt = 1e-2;
  std::size_t thin = 100;
  Integrator integrator = Integrator::kUla;
  double guard_radius = 1e6;
};

struct BaselineResult {
  double error = 0.0;
  double mean = 0.0;
  std::size_t samples = 0;
  double steps = 0.0;
};

/// One Langevin chain at eta started at `start`, run for `step_budget` steps
/// and sampled every `thin` steps. With fewer than `thin` steps the start point
/// is the only sample.
BaselineResult baseline_direct_langevin(const Potential& potential, double eta, double step_budget,
                                        std::uint64_t seed, const TestFn& h, double reference,
                                        std::span<const double> start, const BaselineOptions& opts = {});

struct CalibrationSpec {
  SamplerSetup setup;  ///< plan.inputs carry the starting constants
  std::vector<TestFunction> fns;
  std::vector<double> references;
  double theta = 0.1;
  std::size_t runs = 20;
  std::uint64_t seed_base = 1;
  int iterations = 6;
  /// Coverage required to accept a candidate; defaults to coverage_threshold.
  double required_fraction = -1.0;
  /// Factor applied to both constants while the starting point fails.
  double growth = 4.0;
  int max_growth = 6;
};

struct CalibrationStep {
  PlanConstants constants;
  std::size_t n = 0;
  double t = 0.0;
  double success_fraction = 0.0;
  bool pass = false;
};

struct CalibrationResult {
  PlanConstants constants;
  Plan plan;
  CoverageReport report;
  std::vector<CalibrationStep> history;
  bool success = false;
};

/// Finds cheap C_N, C_T for which the coverage trial passes. N and T are
/// grown by `growth` until the start passes; then C_N is bisected in log space
/// with C_T rescaled so that T stays put (T depends on N through the plan),
/// then C_T at the chosen N. Floors are 1000 times below the passing values.
/// The accuracy target is plan.inputs.delta.
CalibrationResult calibrate_constants(const CalibrationSpec& spec);

}  // namespace asmc

#endif  // ASMC_DIAGNOSTICS_HPP
