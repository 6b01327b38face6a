#ifndef ASMC_POTENTIAL_HPP
#define ASMC_POTENTIAL_HPP

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace asmc {

using Point = std::vector<double>;
using ParamMap = std::map<std::string, double>;

struct Minimum {
  Point location;
  double energy = 0.0;
};

/// Axis-aligned box, one (lo, hi) pair per coordinate.
struct Box {
  Point lo;
  Point hi;
};

/// Energy landscape U: R^d -> R, shifted so that the lowest declared minimum
/// has energy exactly 0. Minima are ordered by energy (index 0 is the global
/// minimum; ties keep declaration order).
///
/// The checked entry points (`energy`, `gradient`) validate the dimension;
/// the `*_unchecked` variants are the hot-path versions used by the kernels.
class Potential {
 public:
  virtual ~Potential() = default;

  Potential(const Potential&) = delete;
  Potential& operator=(const Potential&) = delete;

  const std::string& id() const noexcept { return id_; }
  const ParamMap& params() const noexcept { return params_; }
  std::size_t dimension() const noexcept { return dim_; }

  double energy(std::span<const double> x) const;
  Point gradient(std::span<const double> x) const;
  void gradient(std::span<const double> x, std::span<double> out) const;
  double laplacian(std::span<const double> x) const;
  /// Row-major d x d Hessian by central differences of the analytic gradient.
  std::vector<double> hessian(std::span<const double> x) const;

  double energy_unchecked(const double* x) const { return raw_energy(x) - shift_; }
  void gradient_unchecked(const double* x, double* g) const { raw_gradient(x, g); }

  const std::vector<Minimum>& minima() const noexcept { return minima_; }
  /// Saddles known in closed form (empty when they must be searched for).
  const std::vector<Point>& declared_saddles() const noexcept { return declared_saddles_; }

  /// sup |Laplacian U| over the reference box (sublevel box at level 40).
  double laplacian_bound() const noexcept { return laplacian_bound_; }
  /// min |grad U| over the boundary of the reference box.
  double gradient_liminf() const noexcept { return gradient_liminf_; }

  /// Closed-form basin partition when the potential has one (0-based minimum
  /// index). Must agree with the gradient flow off the separatrices.
  virtual std::optional<std::size_t> analytic_basin(std::span<const double> x) const;

 protected:
  Potential(std::string id, std::size_t dim, ParamMap params);

  virtual double raw_energy(const double* x) const = 0;
  virtual void raw_gradient(const double* x, double* g) const = 0;
  virtual double raw_laplacian(const double* x) const;

  /// Refines `minimum_seeds` to critical points by Newton's method, orders
  /// them, fixes the energy shift and computes the regularity metadata.
  /// Derived constructors call this once their parameters are set.
  void finalize(const std::vector<Point>& minimum_seeds, std::vector<Point> saddles = {});

 private:
  std::string id_;
  std::size_t dim_;
  ParamMap params_;
  double shift_ = 0.0;
  std::vector<Minimum> minima_;
  std::vector<Point> declared_saddles_;
  double laplacian_bound_ = 0.0;
  double gradient_liminf_ = 0.0;
};

using PotentialPtr = std::shared_ptr<const Potential>;

/// Ids accepted by `make_potential`.
std::vector<std::string> builtin_potential_ids();
/// Parameter names (with defaults) accepted by a built-in id.
ParamMap builtin_potential_defaults(const std::string& id);

/// Built-in potentials:
///   quartic            (x^2-1)^2 + tilt*(x+1)                        params: tilt
///   tilted_quartic     same as quartic with tilt defaulting to 0.1
///   double_well_2d     (x^2-1)^2 + omega*y^2/2                       params: omega
///   gaussian_mixture   -log(w N(-sep e1, s1^2) + (1-w) N(sep e1, s2^2)), d <= 3
///                                                                     params: dim, sep, sigma, sigma2, weight
///   triple_well        c*x^2*(x^2-a^2)^2 with barrier c*4a^6/27    params: a, barrier
///   quadratic          omega*|x|^2/2                                 params: dim, omega
/// Unknown ids or parameters raise ConfigError naming the valid choices.
PotentialPtr make_potential(const std::string& id, const ParamMap& params = {});

/// Axis box containing {U <= level}: grown from the minima until U exceeds
/// `level` on its whole boundary (probed on a grid), then each face is pulled
/// back by bisection.
Box sublevel_box(const Potential& potential, double level);

}  // namespace asmc

#endif  // ASMC_POTENTIAL_HPP
