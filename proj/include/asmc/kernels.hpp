#ifndef ASMC_KERNELS_HPP
#define ASMC_KERNELS_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "asmc/dynamics.hpp"
#include "asmc/landscape.hpp"
#include "asmc/potential.hpp"

// Per-particle kernels of the sampler. Each comes in two flavours: an OpenMP
// version used in production and a plain serial loop kept as the reference
// the tests compare against. Both produce bit-identical results for any
// thread count because every particle draws from its own stream.

namespace asmc::kernels {

enum class Execution { kSerial, kParallel };

/// Positions are stored flat: particle i occupies [i*d, (i+1)*d).
void propagate_serial(const Potential& potential, std::span<double> positions, const LangevinParams& params,
                      std::uint64_t seed, std::uint32_t level);
void propagate_parallel(const Potential& potential, std::span<double> positions, const LangevinParams& params,
                        std::uint64_t seed, std::uint32_t level);
void propagate(Execution exec, const Potential& potential, std::span<double> positions,
               const LangevinParams& params, std::uint64_t seed, std::uint32_t level);

/// out[i] = -(1/eta_next - 1/eta_cur) * U(x_i)
void log_weights_serial(const Potential& potential, std::span<const double> positions, double eta_cur,
                        double eta_next, std::span<double> out);
void log_weights_parallel(const Potential& potential, std::span<const double> positions, double eta_cur,
                          double eta_next, std::span<double> out);
void log_weights(Execution exec, const Potential& potential, std::span<const double> positions, double eta_cur,
                 double eta_next, std::span<double> out);

/// Basin index and K membership per particle.
struct Classification {
  std::vector<std::size_t> basin;
  std::vector<std::uint8_t> in_k;
};
Classification classify_serial(const LandscapeSummary& landscape, std::span<const double> positions);
Classification classify_parallel(const LandscapeSummary& landscape, std::span<const double> positions);
Classification classify(Execution exec, const LandscapeSummary& landscape, std::span<const double> positions);

/// Caps the OpenMP worker pool; 0 leaves the runtime default.
void set_thread_limit(int threads);
int max_threads();

}  // namespace asmc::kernels

#endif  // ASMC_KERNELS_HPP
