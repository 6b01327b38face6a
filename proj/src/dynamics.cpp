#include "asmc/dynamics.hpp"

#include <cmath>

#include "asmc/error.hpp"

namespace asmc {

Integrator parse_integrator(const std::string& name) {
  if (name == "ula") return Integrator::kUla;
  if (name == "mala") return Integrator::kMala;
  throw ConfigError("unknown integrator '" + name + "'; valid: ula, mala");
}

std::string to_string(Integrator integrator) {
  return integrator == Integrator::kUla ? "ula" : "mala";
}

std::size_t LangevinParams::step_count() const {
  if (total_time <= 0.0) return 0;
  const double ratio = total_time / dt;
  // Tolerate representation error in T/dt so that T = 1, dt = 0.01 gives 100 steps.
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) <= 1e-9 * rounded) return static_cast<std::size_t>(rounded);
  return static_cast<std::size_t>(std::ceil(ratio));
}

void LangevinParams::validate() const {
  if (!(temperature > 0.0)) throw InvalidArgument("Langevin: temperature must be positive");
  if (!(total_time >= 0.0) || !std::isfinite(total_time)) throw InvalidArgument("Langevin: time must be finite and >= 0");
  if (!(dt > 0.0)) throw InvalidArgument("Langevin: dt must be positive");
  if (total_time > 0.0 && dt > total_time) throw InvalidArgument("Langevin: dt must not exceed T");
  if (!(guard_radius > 0.0)) throw InvalidArgument("Langevin: guard radius must be positive");
}

void langevin_step(const Potential& potential, std::span<const double> x, double temperature, double dt,
                   std::span<const double> xi, std::span<double> out) {
  const std::size_t d = potential.dimension();
  if (x.size() != d || xi.size() != d || out.size() != d) {
    throw DimensionMismatch("langevin_step: vector sizes must equal the potential dimension");
  }
  Point g(d);
  potential.gradient_unchecked(x.data(), g.data());
  const double noise = std::sqrt(2.0 * temperature * dt);
  for (std::size_t j = 0; j < d; ++j) {
    out[j] = x[j] - g[j] * dt + noise * xi[j];
    if (!std::isfinite(out[j])) throw Divergence("langevin_step: non-finite state (step size too large?)");
  }
}

Point langevin_step(const Potential& potential, std::span<const double> x, double temperature, double dt,
                    std::span<const double> xi) {
  Point out(potential.dimension());
  langevin_step(potential, x, temperature, dt, xi, out);
  return out;
}

namespace {

[[noreturn]] void diverged(const StreamKey& key, double radius) {
  throw Divergence("trajectory left the guard radius " + std::to_string(radius) + " (level " +
                   std::to_string(key.level) + ", particle " + std::to_string(key.particle) +
                   "); reduce dt");
}

}  // namespace

void simulate_in_place(const Potential& potential, std::span<double> x, const LangevinParams& params,
                       const StreamKey& key, std::span<double> work) {
  const std::size_t d = potential.dimension();
  const std::size_t steps = params.step_count();
  if (steps == 0) return;
  NormalSource normal(key);
  double* g = work.data();
  double* y = work.data() + d;
  double* gy = work.data() + 2 * d;
  const double eps = params.temperature;
  const double last_dt = params.total_time - static_cast<double>(steps - 1) * params.dt;

  for (std::size_t s = 0; s < steps; ++s) {
    const double h = s + 1 == steps ? last_dt : params.dt;
    const double noise = std::sqrt(2.0 * eps * h);
    potential.gradient_unchecked(x.data(), g);
    if (params.integrator == Integrator::kUla) {
      for (std::size_t j = 0; j < d; ++j) {
        x[j] += -g[j] * h + noise * normal();
        if (!(std::abs(x[j]) <= params.guard_radius)) diverged(key, params.guard_radius);
      }
      continue;
    }
    // MALA: proposal from the Euler step, accepted with the Metropolis-Hastings ratio.
    for (std::size_t j = 0; j < d; ++j) y[j] = x[j] - g[j] * h + noise * normal();
    potential.gradient_unchecked(y, gy);
    double fwd = 0.0, bwd = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double a = y[j] - x[j] + h * g[j];
      const double b = x[j] - y[j] + h * gy[j];
      fwd += a * a;
      bwd += b * b;
    }
    const double log_ratio = -(potential.energy_unchecked(y) - potential.energy_unchecked(x.data())) / eps -
                             (bwd - fwd) / (4.0 * eps * h);
    const double u = normal.uniform();
    if (std::isfinite(log_ratio) && std::log(u) < log_ratio) {
      for (std::size_t j = 0; j < d; ++j) {
        x[j] = y[j];
        if (!(std::abs(x[j]) <= params.guard_radius)) diverged(key, params.guard_radius);
      }
    }
  }
}

Point simulate(std::span<const double> x0, const Potential& potential, const LangevinParams& params,
               const StreamKey& key) {
  params.validate();
  if (x0.size() != potential.dimension()) throw DimensionMismatch("simulate: wrong initial point dimension");
  Point x(x0.begin(), x0.end());
  Point work(3 * x.size());
  simulate_in_place(potential, x, params, key, work);
  return x;
}

}  // namespace asmc
