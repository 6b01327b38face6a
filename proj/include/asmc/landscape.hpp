#ifndef ASMC_LANDSCAPE_HPP
#define ASMC_LANDSCAPE_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "asmc/potential.hpp"

namespace asmc {

struct FlowParams {
  double grad_tol = 1e-8;
  /// A converged flow must end this close to a declared minimum.
  double snap_radius = 1e-3;
  std::size_t max_steps = 200000;
  /// Largest displacement allowed in one descent step.
  double max_displacement = 0.05;
};

struct BasinResult {
  std::size_t index = 0;  ///< 0-based minimum index
  /// The flow stalled on a separatrix; `index` is the lowest adjacent basin.
  bool on_separatrix = false;
  Point endpoint;
  std::size_t steps = 0;
};

/// Integrates the descent flow y' = -grad U(y) (backtracking gradient descent)
/// from `x` until |grad U| < tol and returns the basin of the minimum reached.
/// Throws NonConvergence when the step budget runs out or the flow lands on a
/// critical point that is neither a declared minimum nor a saddle.
BasinResult classify_basin(const Potential& potential, std::span<const double> x,
                           const FlowParams& params = {});

struct Saddle {
  std::size_t from = 0;  ///< minimum indices joined by this saddle (from < to)
  std::size_t to = 0;
  Point location;
  double energy = 0.0;
};

/// Saddle structure, barriers and the truncation sets B_i and K for a fixed
/// slack parameter alpha.
///
///   B_i = { x in basin i : U(x) - U(x_min,i) <= barrier / (1+alpha)^(1/4) }
///   K   = union of the B_i,     C_K = barrier / (1+alpha)^(1/2)
struct LandscapeSummary {
  PotentialPtr potential;
  std::vector<Saddle> saddles;
  /// Saddle on the minimax path between minimum 0 and minimum 1.
  Saddle primary_saddle;
  double saddle_height = 0.0;   ///< U-hat
  double energy_barrier = 0.0;  ///< gamma-hat
  double barrier_ratio = 1.0;   ///< U-hat / gamma-hat
  double alpha = 1.0;
  double b_threshold = 0.0;
  double c_k = 0.0;
  FlowParams flow{};

  /// Uses the potential's closed-form partition when available, the flow otherwise.
  std::size_t basin_of(std::span<const double> x) const;
  bool in_b(std::size_t i, std::span<const double> x) const;
  /// Index of the B_i containing x, if any.
  std::optional<std::size_t> b_index(std::span<const double> x) const;
  bool in_k(std::span<const double> x) const { return b_index(x).has_value(); }
  /// Same as b_index when the basin is already known.
  std::optional<std::size_t> b_index(std::span<const double> x, std::size_t basin) const;
};

/// Requires alpha > 0 and at least two minima. In one dimension saddles are
/// located by a grid search for the maximum of U between adjacent minima and
/// polished by Newton's method; in higher dimension declared saddles are used,
/// falling back to the maximum along the segment between the two minima
/// refined by Newton on grad U = 0. Each saddle must have Hessian index one.
LandscapeSummary landscape_summary(PotentialPtr potential, double alpha,
                                   const FlowParams& flow = {});

}  // namespace asmc

#endif  // ASMC_LANDSCAPE_HPP
