#ifndef ASMC_DYNAMICS_HPP
#define ASMC_DYNAMICS_HPP

#include <cstddef>
#include <span>
#include <string>

#include "asmc/potential.hpp"
#include "asmc/rng.hpp"

namespace asmc {

enum class Integrator {
  kUla,   ///< unadjusted Langevin (Euler-Maruyama)
  kMala,  ///< Metropolis-adjusted Langevin
};

Integrator parse_integrator(const std::string& name);
std::string to_string(Integrator integrator);

/// Discretization of dY = -grad U(Y) dt + sqrt(2 eps) dW.
struct LangevinParams {
  double temperature = 1.0;  ///< eps
  double total_time = 1.0;   ///< T
  double dt = 1e-2;
  double guard_radius = 1e6;
  Integrator integrator = Integrator::kUla;

  /// Number of steps: ceil(T / dt), the last one possibly shorter.
  std::size_t step_count() const;
  /// Throws InvalidArgument unless eps > 0, T >= 0, 0 < dt and dt <= T (when T > 0).
  void validate() const;
};

/// One Euler-Maruyama step: out = x - grad U(x) dt + sqrt(2 eps dt) xi.
/// Throws Divergence on a non-finite result.
void langevin_step(const Potential& potential, std::span<const double> x, double temperature, double dt,
                   std::span<const double> xi, std::span<double> out);
Point langevin_step(const Potential& potential, std::span<const double> x, double temperature, double dt,
                    std::span<const double> xi);

/// Advances `x` in place for params.total_time using the stream `key`.
/// Scratch-free hot path used by the ensemble kernels; `work` must hold 3*d doubles.
void simulate_in_place(const Potential& potential, std::span<double> x, const LangevinParams& params,
                       const StreamKey& key, std::span<double> work);

/// Runs the discretized diffusion from x0. Output is a pure function of
/// (x0, potential, params, key).
Point simulate(std::span<const double> x0, const Potential& potential, const LangevinParams& params,
               const StreamKey& key);

}  // namespace asmc

#endif  // ASMC_DYNAMICS_HPP
