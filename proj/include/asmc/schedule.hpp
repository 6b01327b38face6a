#ifndef ASMC_SCHEDULE_HPP
#define ASMC_SCHEDULE_HPP

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace asmc {

/// Temperatures eta_1 > ... > eta_M = eta with equally spaced inverse
/// temperatures.
struct AnnealSchedule {
  double target = 1.0;  ///< eta
  double start = 1.0;   ///< eta_1
  std::vector<double> levels;
  /// Set when M = 1 was requested with eta != eta_1: the schedule collapses to
  /// the single level eta.
  bool degenerate = false;

  std::size_t size() const noexcept { return levels.size(); }
  /// 1-based level access, matching the usual eta_k indexing.
  double eta(std::size_t k) const { return levels.at(k - 1); }
};

/// eta_k = 1 / (1/eta_1 + (k-1)/(M-1) * (1/eta - 1/eta_1)), k = 1..M.
/// For eta_1 = 1 this is (M-1) eta / ((M-1) eta + (k-1)(1-eta)).
/// Throws InvalidArgument for eta <= 0, eta > eta_1 or M = 0.
AnnealSchedule build_schedule(double eta, std::size_t level_count, double eta1 = 1.0);

/// Smallest k >= 2 with eta_k <= eta_cr, or M + 1 when no level qualifies.
std::size_t critical_level(const AnnealSchedule& schedule, double eta_cr);

/// Free constants of the parameter choice, calibrated empirically
/// (see calibrate_constants).
struct PlanConstants {
  double c_n = 1.0;
  double c_t = 1.0;
  double c_tem = 1.0;
};

struct PlanInputs {
  double eta = 0.1;
  double eta1 = 1.0;
  double delta = 0.1;
  double theta = 0.1;
  double alpha = 1.0;
  double nu = 1.0;
  double barrier_ratio = 1.0;  ///< gamma-hat_r
  double c_k = 0.0;            ///< barrier / sqrt(1 + alpha), for eta_cr
  PlanConstants constants{};
  double dt = 1e-2;
  /// Largest admissible N * M * ceil(T / dt).
  double budget_cap = 1e10;
};

struct Plan {
  std::size_t m = 1;
  std::size_t n = 1;
  double t = 0.0;
  PlanInputs inputs{};
  double eta_cr = 0.0;
  std::size_t k_cr = 0;
  AnnealSchedule schedule{};

  /// Langevin steps across all particles and levels: N * M * ceil(T / dt).
  double step_budget() const;
  /// The complexity proxy M * N * T.
  double work() const { return static_cast<double>(m) * static_cast<double>(n) * t; }
};

/// Lower bounds on (M, N, T) from the parameter choice:
///   M >= ceil(1 / (nu eta)),  N >= C_N M^2 / delta^2 log(M / theta),
///   T >= C_T ((M N / theta)^(gamma_r (1 + alpha)) (log N + log(M / theta)) + log(1/delta) + 1/eta)
/// The T bound is evaluated at the given (M, N).
struct PlanBounds {
  double m_min = 0.0;
  double n_min = 0.0;
  double t_min = 0.0;
};
PlanBounds plan_bounds(const PlanInputs& in, std::size_t m, std::size_t n);

/// Smallest (M, N, T) meeting the bounds, plus the critical temperature
/// eta_cr = C_K / log(C_tem M N / theta) and level k_cr.
/// Throws BudgetExceeded when T is not finite or the step budget exceeds the cap.
Plan plan_parameters(const PlanInputs& inputs);

struct PlanOverrides {
  std::optional<std::size_t> m;
  std::optional<std::size_t> n;
  std::optional<double> t;
  /// Accept overrides that violate the bounds.
  bool unsafe = false;
};

/// plan_parameters with any of (M, N, T) replaced. Overrides below the bounds
/// throw InvalidArgument unless `unsafe` is set.
Plan plan_with_overrides(const PlanInputs& inputs, const PlanOverrides& overrides);

/// Names of the violated bounds ("M", "N", "T") for a plan, empty when all hold.
std::vector<std::string> violated_bounds(const Plan& plan);

}  // namespace asmc

#endif  // ASMC_SCHEDULE_HPP
