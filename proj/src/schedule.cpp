#include "asmc/schedule.hpp"

#include <cmath>

#include "asmc/error.hpp"

namespace asmc {

namespace {

// ceil() that ignores representation error just above an integer.
double stable_ceil(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-12 * std::max(1.0, std::abs(r))) return r;
  return std::ceil(x);
}

void validate(const PlanInputs& in) {
  if (!(in.eta > 0.0) || !(in.eta1 > 0.0) || in.eta > in.eta1) {
    throw InvalidArgument("plan: need 0 < eta <= eta1");
  }
  if (!(in.delta > 0.0 && in.delta < 1.0)) throw InvalidArgument("plan: delta must lie in (0, 1)");
  if (!(in.theta > 0.0 && in.theta < 1.0)) throw InvalidArgument("plan: theta must lie in (0, 1)");
  if (!(in.alpha > 0.0) || !(in.nu > 0.0)) throw InvalidArgument("plan: alpha and nu must be positive");
  if (!(in.barrier_ratio >= 1.0)) throw InvalidArgument("plan: barrier ratio must be >= 1");
  const auto& c = in.constants;
  if (!(c.c_n > 0.0) || !(c.c_t > 0.0) || !(c.c_tem > 0.0)) {
    throw InvalidArgument("plan: constants C_N, C_T, C_tem must be positive");
  }
  if (!(in.dt > 0.0)) throw InvalidArgument("plan: dt must be positive");
}

double critical_temperature(const PlanInputs& in, std::size_t m, std::size_t n) {
  const double arg = in.constants.c_tem * static_cast<double>(m) * static_cast<double>(n) / in.theta;
  if (arg <= 1.0) return std::numeric_limits<double>::infinity();
  return in.c_k / std::log(arg);
}

Plan assemble(const PlanInputs& in, std::size_t m, std::size_t n, double t) {
  Plan plan;
  plan.inputs = in;
  plan.m = m;
  plan.n = n;
  plan.t = t;
  plan.schedule = build_schedule(in.eta, m, in.eta1);
  plan.eta_cr = critical_temperature(in, m, n);
  plan.k_cr = critical_level(plan.schedule, plan.eta_cr);
  if (!std::isfinite(t)) throw BudgetExceeded("plan: T overflows; request is infeasible");
  const double budget = plan.step_budget();
  if (budget > in.budget_cap) {
    throw BudgetExceeded("plan: N*M*ceil(T/dt) = " + std::to_string(budget) + " exceeds budget cap " +
                         std::to_string(in.budget_cap));
  }
  return plan;
}

}  // namespace

AnnealSchedule build_schedule(double eta, std::size_t level_count, double eta1) {
  if (!(eta > 0.0) || !(eta1 > 0.0)) throw InvalidArgument("build_schedule: temperatures must be positive");
  if (eta > eta1) throw InvalidArgument("build_schedule: target eta must not exceed eta1");
  if (level_count == 0) throw InvalidArgument("build_schedule: need at least one level");
  AnnealSchedule s;
  s.target = eta;
  s.start = eta1;
  if (level_count == 1) {
    s.levels = {eta};
    s.degenerate = eta != eta1;
    return s;
  }
  s.levels.resize(level_count);
  const double b1 = 1.0 / eta1;
  const double span = 1.0 / eta - b1;
  const double last = static_cast<double>(level_count - 1);
  for (std::size_t k = 0; k < level_count; ++k) {
    s.levels[k] = 1.0 / (b1 + span * static_cast<double>(k) / last);
  }
  s.levels.front() = eta1;
  s.levels.back() = eta;
  return s;
}

std::size_t critical_level(const AnnealSchedule& schedule, double eta_cr) {
  const std::size_t m = schedule.size();
  for (std::size_t k = 2; k <= m; ++k) {
    if (schedule.eta(k) <= eta_cr) return k;
  }
  return m + 1;
}

double Plan::step_budget() const {
  const double steps = std::ceil(t / inputs.dt);
  return static_cast<double>(n) * static_cast<double>(m) * steps;
}

PlanBounds plan_bounds(const PlanInputs& in, std::size_t m, std::size_t n) {
  PlanBounds b;
  b.m_min = stable_ceil(1.0 / (in.nu * in.eta));
  const double md = static_cast<double>(m), nd = static_cast<double>(n);
  b.n_min = in.constants.c_n * md * md / (in.delta * in.delta) * std::log(md / in.theta);
  const double power = std::pow(md * nd / in.theta, in.barrier_ratio * (1.0 + in.alpha));
  b.t_min = in.constants.c_t *
            (power * (std::log(nd) + std::log(md / in.theta)) + std::log(1.0 / in.delta) + 1.0 / in.eta);
  return b;
}

Plan plan_parameters(const PlanInputs& in) {
  return plan_with_overrides(in, {});
}

Plan plan_with_overrides(const PlanInputs& in, const PlanOverrides& ov) {
  validate(in);
  const std::size_t m_min = static_cast<std::size_t>(plan_bounds(in, 1, 1).m_min);
  const std::size_t m = ov.m.value_or(std::max<std::size_t>(1, m_min));
  if (m == 0) throw InvalidArgument("plan: M must be at least 1");
  const double n_min = plan_bounds(in, m, 1).n_min;
  if (!std::isfinite(n_min) || n_min > 1e15) throw BudgetExceeded("plan: N overflows; request is infeasible");
  const std::size_t n = ov.n.value_or(std::max<std::size_t>(1, static_cast<std::size_t>(stable_ceil(n_min))));
  if (n == 0) throw InvalidArgument("plan: N must be at least 1");
  const PlanBounds bounds = plan_bounds(in, m, n);
  const double t = ov.t.value_or(bounds.t_min);
  if (!(t > 0.0)) throw InvalidArgument("plan: T must be positive");
  Plan plan = assemble(in, m, n, t);
  if (!ov.unsafe) {
    const auto bad = violated_bounds(plan);
    if (!bad.empty()) {
      std::string names;
      for (const auto& b : bad) names += (names.empty() ? "" : ", ") + b;
      throw InvalidArgument("plan: overrides violate the lower bounds on " + names +
                            " (pass --unsafe to accept)");
    }
  }
  return plan;
}

std::vector<std::string> violated_bounds(const Plan& plan) {
  const PlanBounds b = plan_bounds(plan.inputs, plan.m, plan.n);
  std::vector<std::string> bad;
  if (static_cast<double>(plan.m) < b.m_min) bad.emplace_back("M");
  if (static_cast<double>(plan.n) < b.n_min * (1.0 - 1e-12)) bad.emplace_back("N");
  if (plan.t < b.t_min * (1.0 - 1e-12)) bad.emplace_back("T");
  return bad;
}

}  // namespace asmc
