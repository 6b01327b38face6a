#include "asmc/kernels.hpp"

#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "asmc/error.hpp"

namespace asmc::kernels {

namespace {

void check_layout(const Potential& potential, std::size_t size) {
  if (size % potential.dimension() != 0) {
    throw DimensionMismatch("ensemble storage is not a multiple of the dimension");
  }
}

// Exceptions must not escape an OpenMP region; the first one is rethrown
// after the loop, lowest particle index first.
class FirstError {
 public:
  void capture(std::size_t index) {
    std::lock_guard lock(mutex_);
    if (!error_ || index < index_) {
      error_ = std::current_exception();
      index_ = index;
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mutex_;
  std::exception_ptr error_;
  std::size_t index_ = 0;
};

}  // namespace

void propagate_serial(const Potential& potential, std::span<double> positions, const LangevinParams& params,
                      std::uint64_t seed, std::uint32_t level) {
  check_layout(potential, positions.size());
  const std::size_t d = potential.dimension();
  const std::size_t n = positions.size() / d;
  Point work(3 * d);
  for (std::size_t i = 0; i < n; ++i) {
    simulate_in_place(potential, positions.subspan(i * d, d), params,
                      {seed, level, static_cast<std::uint32_t>(i)}, work);
  }
}

void propagate_parallel(const Potential& potential, std::span<double> positions, const LangevinParams& params,
                        std::uint64_t seed, std::uint32_t level) {
  check_layout(potential, positions.size());
  const std::size_t d = potential.dimension();
  const auto n = static_cast<std::int64_t>(positions.size() / d);
  FirstError error;
#pragma omp parallel
  {
    Point work(3 * d);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      try {
        simulate_in_place(potential, positions.subspan(idx * d, d), params,
                          {seed, level, static_cast<std::uint32_t>(idx)}, work);
      } catch (...) {
        error.capture(idx);
      }
    }
  }
  error.rethrow();
}

void propagate(Execution exec, const Potential& potential, std::span<double> positions,
               const LangevinParams& params, std::uint64_t seed, std::uint32_t level) {
  if (exec == Execution::kSerial) {
    propagate_serial(potential, positions, params, seed, level);
  } else {
    propagate_parallel(potential, positions, params, seed, level);
  }
}

void log_weights_serial(const Potential& potential, std::span<const double> positions, double eta_cur,
                        double eta_next, std::span<double> out) {
  check_layout(potential, positions.size());
  const std::size_t d = potential.dimension();
  const double scale = 1.0 / eta_next - 1.0 / eta_cur;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = -scale * potential.energy_unchecked(positions.data() + i * d);
  }
}

void log_weights_parallel(const Potential& potential, std::span<const double> positions, double eta_cur,
                          double eta_next, std::span<double> out) {
  check_layout(potential, positions.size());
  const std::size_t d = potential.dimension();
  const double scale = 1.0 / eta_next - 1.0 / eta_cur;
  const auto n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = -scale * potential.energy_unchecked(positions.data() + i * d);
  }
}

void log_weights(Execution exec, const Potential& potential, std::span<const double> positions, double eta_cur,
                 double eta_next, std::span<double> out) {
  if (positions.size() != out.size() * potential.dimension()) {
    throw DimensionMismatch("log_weights: output size does not match the ensemble");
  }
  if (exec == Execution::kSerial) {
    log_weights_serial(potential, positions, eta_cur, eta_next, out);
  } else {
    log_weights_parallel(potential, positions, eta_cur, eta_next, out);
  }
}

Classification classify_serial(const LandscapeSummary& landscape, std::span<const double> positions) {
  const std::size_t d = landscape.potential->dimension();
  check_layout(*landscape.potential, positions.size());
  const std::size_t n = positions.size() / d;
  Classification c{std::vector<std::size_t>(n), std::vector<std::uint8_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = positions.subspan(i * d, d);
    c.basin[i] = landscape.basin_of(x);
    c.in_k[i] = landscape.b_index(x, c.basin[i]).has_value();
  }
  return c;
}

Classification classify_parallel(const LandscapeSummary& landscape, std::span<const double> positions) {
  const std::size_t d = landscape.potential->dimension();
  check_layout(*landscape.potential, positions.size());
  const auto n = static_cast<std::int64_t>(positions.size() / d);
  Classification c{std::vector<std::size_t>(static_cast<std::size_t>(n)),
                   std::vector<std::uint8_t>(static_cast<std::size_t>(n))};
  FirstError error;
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      const auto x = positions.subspan(idx * d, d);
      c.basin[idx] = landscape.basin_of(x);
      c.in_k[idx] = landscape.b_index(x, c.basin[idx]).has_value();
    } catch (...) {
      error.capture(idx);
    }
  }
  error.rethrow();
  return c;
}

Classification classify(Execution exec, const LandscapeSummary& landscape, std::span<const double> positions) {
  return exec == Execution::kSerial ? classify_serial(landscape, positions)
                                    : classify_parallel(landscape, positions);
}

void set_thread_limit(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace asmc::kernels
