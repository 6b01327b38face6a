#include "asmc/oracle.hpp"

#include <lapacke.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "asmc/error.hpp"

namespace asmc {

namespace {

constexpr double kLevelFactor = 40.0;
constexpr double kPadding = 0.2;

int max_level_for(const QuadratureOptions& opts, std::size_t d) {
  if (opts.max_level > 0) return opts.max_level;
  return d == 1 ? 20 : d == 2 ? 11 : 7;
}

void check_quadrature_dim(const Potential& potential) {
  if (potential.dimension() > 3) throw InvalidArgument("quadrature supports d <= 3");
}

// Tensor-product Simpson rule for `outputs` integrands at once.
template <class F>
std::vector<double> simpson_tensor(const Box& box, std::size_t n, std::size_t outputs, F&& f) {
  const std::size_t d = box.lo.size();
  std::vector<std::vector<double>> w(d);
  std::vector<double> h(d);
  std::size_t total = 1;
  for (std::size_t j = 0; j < d; ++j) {
    h[j] = (box.hi[j] - box.lo[j]) / static_cast<double>(n - 1);
    w[j] = simpson_weights(n, h[j]);
    total *= n;
  }
  std::vector<std::size_t> idx(d, 0);
  Point x(d);
  std::vector<double> acc(outputs, 0.0), vals(outputs);
  for (std::size_t flat = 0; flat < total; ++flat) {
    double wt = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      x[j] = box.lo[j] + static_cast<double>(idx[j]) * h[j];
      wt *= w[j][idx[j]];
    }
    f(std::span<const double>(x), vals);
    for (std::size_t o = 0; o < outputs; ++o) acc[o] += wt * vals[o];
    for (std::size_t j = d; j-- > 0;) {
      if (++idx[j] < n) break;
      idx[j] = 0;
    }
  }
  return acc;
}

double boltzmann(const Potential& u, std::span<const double> x, double eps) {
  return std::exp(-u.energy_unchecked(x.data()) / eps);
}

// Simpson on [a, b] doubling until the relative change drops below tol.
template <class F>
std::pair<double, double> simpson_1d(F&& f, double a, double b, double tol, int min_level, int max_level) {
  if (!(b > a)) return {0.0, 0.0};
  double prev = 0.0;
  for (int level = min_level; level <= max_level; ++level) {
    const std::size_t n = (std::size_t{1} << level) + 1;
    const double h = (b - a) / static_cast<double>(n - 1);
    const auto w = simpson_weights(n, h);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * f(a + static_cast<double>(i) * h);
    if (level > min_level) {
      const double change = s == 0.0 ? std::abs(s - prev) : std::abs(s - prev) / std::abs(s);
      if (change < tol || s == 0.0) return {s, change};
    }
    prev = s;
  }
  throw NonConvergence("Simpson refinement did not converge on [" + std::to_string(a) + ", " +
                       std::to_string(b) + "]");
}

}  // namespace

Box reference_box(const Potential& potential, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("temperature must be positive");
  Box box = sublevel_box(potential, kLevelFactor * eps);
  for (std::size_t j = 0; j < box.lo.size(); ++j) {
    const double centre = 0.5 * (box.lo[j] + box.hi[j]);
    const double half = 0.5 * (box.hi[j] - box.lo[j]) * (1.0 + kPadding);
    box.lo[j] = centre - half;
    box.hi[j] = centre + half;
  }
  return box;
}

std::vector<double> simpson_weights(std::size_t n, double h) {
  if (n < 3 || n % 2 == 0) throw InvalidArgument("Simpson rule needs an odd node count >= 3");
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = (i == 0 || i + 1 == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
  for (double& v : w) v *= h / 3.0;
  return w;
}

QuadratureResult grid_partition_function(const Potential& potential, double eps, const QuadratureOptions& opts) {
  check_quadrature_dim(potential);
  const Box box = reference_box(potential, eps);
  const int top = max_level_for(opts, potential.dimension());
  double prev = 0.0;
  for (int level = opts.min_level; level <= top; ++level) {
    const std::size_t n = (std::size_t{1} << level) + 1;
    const double z = simpson_tensor(box, n, 1, [&](std::span<const double> x, std::vector<double>& v) {
      v[0] = boltzmann(potential, x, eps);
    })[0];
    if (level > opts.min_level) {
      const double change = std::abs(z - prev) / z;
      if (change < opts.rel_tol) return {z, n, change};
    }
    prev = z;
  }
  throw NonConvergence("partition function quadrature did not reach the relative tolerance");
}

QuadratureResult grid_expectation(const Potential& potential, double eps, const TestFn& h,
                                  const QuadratureOptions& opts) {
  check_quadrature_dim(potential);
  const Box box = reference_box(potential, eps);
  const int top = max_level_for(opts, potential.dimension());
  double prev = 0.0;
  for (int level = opts.min_level; level <= top; ++level) {
    const std::size_t n = (std::size_t{1} << level) + 1;
    const auto s = simpson_tensor(box, n, 2, [&](std::span<const double> x, std::vector<double>& v) {
      v[0] = boltzmann(potential, x, eps);
      v[1] = v[0] == 0.0 ? 0.0 : v[0] * h(x);
    });
    const double value = s[1] / s[0];
    if (level > opts.min_level) {
      const double change = std::abs(value - prev) / (1.0 + std::abs(value));
      if (change < opts.rel_tol) return {value, n, change};
    }
    prev = value;
  }
  throw NonConvergence("expectation quadrature did not reach the tolerance");
}

double laplace_asymptotic_z(const Potential& potential, double eps) {
  const auto d = static_cast<Eigen::Index>(potential.dimension());
  double z = 0.0;
  for (const auto& m : potential.minima()) {
    const auto h = potential.hessian(m.location);
    const double det = Eigen::Map<const Eigen::MatrixXd>(h.data(), d, d).determinant();
    if (!(det > 0.0)) throw InvalidArgument("Laplace approximation needs positive definite Hessians at the minima");
    z += std::pow(2.0 * std::numbers::pi * eps, 0.5 * static_cast<double>(d)) / std::sqrt(det) *
         std::exp(-m.energy / eps);
  }
  return z;
}

namespace {

// Point where U crosses `level` between the minimum m (below) and the edge e.
double crossing(const Potential& u, double m, double e, double level) {
  if (u.energy_unchecked(&e) <= level) return e;
  double inside = m, outside = e;
  for (int i = 0; i < 200 && std::abs(outside - inside) > 1e-14 * (1.0 + std::abs(m)); ++i) {
    const double mid = 0.5 * (inside + outside);
    (u.energy_unchecked(&mid) <= level ? inside : outside) = mid;
  }
  return 0.5 * (inside + outside);
}

std::vector<double> density_grid(const Potential& u, const Box& box, double eps, double z, std::size_t n) {
  const std::size_t d = box.lo.size();
  std::size_t total = 1;
  for (std::size_t j = 0; j < d; ++j) total *= n;
  std::vector<double> out(total);
  std::vector<std::size_t> idx(d, 0);
  Point x(d);
  for (std::size_t flat = 0; flat < total; ++flat) {
    for (std::size_t j = 0; j < d; ++j) {
      x[j] = box.lo[j] + static_cast<double>(idx[j]) * (box.hi[j] - box.lo[j]) / static_cast<double>(n - 1);
    }
    out[flat] = boltzmann(u, x, eps) / z;
    for (std::size_t j = d; j-- > 0;) {
      if (++idx[j] < n) break;
      idx[j] = 0;
    }
  }
  return out;
}

void finish_masses(GibbsReference& ref) {
  ref.c_m = 0.0;
  for (double m : ref.well_masses) ref.c_m = std::max(ref.c_m, 1.0 / std::sqrt(m));
}

GibbsReference gibbs_reference_1d(const LandscapeSummary& ls, double eps, const QuadratureOptions& opts) {
  const Potential& u = *ls.potential;
  GibbsReference ref;
  ref.eps = eps;
  ref.box = reference_box(u, eps);
  const double lo = ref.box.lo[0], hi = ref.box.hi[0];

  std::vector<double> saddles;
  for (const auto& s : ls.saddles) saddles.push_back(s.location[0]);
  std::sort(saddles.begin(), saddles.end());
  std::vector<double> cuts{lo, hi};
  for (double s : saddles) {
    if (s > lo && s < hi) cuts.push_back(s);
  }
  for (const auto& m : u.minima()) {
    const double x = m.location[0];
    double left = lo, right = hi;
    for (double s : saddles) {
      if (s < x) left = std::max(left, s);
      if (s > x) right = std::min(right, s);
    }
    const double level = m.energy + ls.b_threshold;
    cuts.push_back(crossing(u, x, left, level));
    cuts.push_back(crossing(u, x, right, level));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const std::size_t wells = u.minima().size();
  std::vector<double> basin(wells, 0.0), in_b(wells, 0.0);
  double total = 0.0, outside = 0.0;
  const double tol = std::min(opts.rel_tol, 1e-10);
  const auto f = [&](double x) { return std::exp(-u.energy_unchecked(&x) / eps); };
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double a = cuts[p], b = cuts[p + 1];
    if (!(b > a)) continue;
    const auto [value, change] = simpson_1d(f, a, b, tol, opts.min_level, max_level_for(opts, 1));
    ref.refinement_change = std::max(ref.refinement_change, change);
    const double mid = 0.5 * (a + b);
    const std::size_t i = ls.basin_of(std::span<const double>(&mid, 1));
    total += value;
    basin[i] += value;
    if (ls.b_index(std::span<const double>(&mid, 1), i)) {
      in_b[i] += value;
    } else {
      outside += value;
    }
  }
  ref.z = total;
  for (std::size_t i = 0; i < wells; ++i) {
    ref.well_masses.push_back(basin[i] / total);
    ref.b_masses.push_back(in_b[i] / total);
  }
  ref.mass_outside_k = outside / total;
  return ref;
}

GibbsReference gibbs_reference_nd(const LandscapeSummary& ls, double eps, const QuadratureOptions& opts) {
  const Potential& u = *ls.potential;
  const std::size_t wells = u.minima().size();
  GibbsReference ref;
  ref.eps = eps;
  ref.box = reference_box(u, eps);
  const int top = max_level_for(opts, u.dimension());
  std::vector<double> prev;
  for (int level = opts.min_level; level <= top; ++level) {
    const std::size_t n = (std::size_t{1} << level) + 1;
    const auto s = simpson_tensor(ref.box, n, 2 + 2 * wells, [&](std::span<const double> x, std::vector<double>& v) {
      std::fill(v.begin(), v.end(), 0.0);
      const double energy = u.energy_unchecked(x.data());
      v[0] = std::exp(-energy / eps);
      if (energy / eps > 745.0) return;
      const std::size_t i = ls.basin_of(x);
      v[2 + i] = v[0];
      if (ls.b_index(x, i)) {
        v[2 + wells + i] = v[0];
      } else {
        v[1] = v[0];
      }
    });
    std::vector<double> cur(s.size());
    cur[0] = s[0];
    for (std::size_t k = 1; k < s.size(); ++k) cur[k] = s[k] / s[0];
    if (!prev.empty()) {
      const double z_change = std::abs(cur[0] - prev[0]) / cur[0];
      double mass_change = 0.0;
      for (std::size_t k = 1; k < cur.size(); ++k) mass_change = std::max(mass_change, std::abs(cur[k] - prev[k]));
      if (z_change < opts.rel_tol && (mass_change < 100.0 * opts.rel_tol || level == top)) {
        ref.z = cur[0];
        ref.mass_outside_k = cur[1];
        for (std::size_t i = 0; i < wells; ++i) {
          ref.well_masses.push_back(cur[2 + i]);
          ref.b_masses.push_back(cur[2 + wells + i]);
        }
        ref.refinement_change = std::max(z_change, mass_change);
        return ref;
      }
    }
    prev = cur;
  }
  throw NonConvergence("Gibbs reference quadrature did not converge");
}

}  // namespace

GibbsReference gibbs_reference(const LandscapeSummary& landscape, double eps, const QuadratureOptions& opts,
                               std::size_t density_nodes) {
  check_quadrature_dim(*landscape.potential);
  const std::size_t d = landscape.potential->dimension();
  GibbsReference ref = d == 1 ? gibbs_reference_1d(landscape, eps, opts) : gibbs_reference_nd(landscape, eps, opts);
  finish_masses(ref);
  std::size_t n = d == 1 ? density_nodes : std::min<std::size_t>(density_nodes, d == 2 ? 129 : 33);
  if (n % 2 == 0) ++n;
  ref.nodes = n;
  ref.density = density_grid(*landscape.potential, ref.box, eps, ref.z, n);
  // Rescale so the tabulated density integrates to one under the grid's own Simpson rule.
  std::vector<std::vector<double>> w(d);
  for (std::size_t j = 0; j < d; ++j) w[j] = simpson_weights(n, (ref.box.hi[j] - ref.box.lo[j]) / static_cast<double>(n - 1));
  double integral = 0.0;
  for (std::size_t idx = 0; idx < ref.density.size(); ++idx) {
    double wt = 1.0;
    std::size_t rest = idx;
    for (std::size_t j = d; j-- > 0;) {
      wt *= w[j][rest % n];
      rest /= n;
    }
    integral += wt * ref.density[idx];
  }
  for (double& v : ref.density) v /= integral;
  return ref;
}

WellMasses well_masses(const LandscapeSummary& landscape, double eps, const QuadratureOptions& opts) {
  const auto ref = gibbs_reference(landscape, eps, opts, 3);
  return {ref.well_masses, ref.mass_outside_k};
}

namespace {

std::vector<double> cell_centres(const Box& box, std::size_t cells, std::vector<double>& h) {
  const std::size_t d = box.lo.size();
  std::size_t total = 1;
  h.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    h[j] = (box.hi[j] - box.lo[j]) / static_cast<double>(cells);
    total *= cells;
  }
  std::vector<double> pts(total * d);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t c = 0; c < total; ++c) {
    for (std::size_t j = 0; j < d; ++j) pts[c * d + j] = box.lo[j] + (static_cast<double>(idx[j]) + 0.5) * h[j];
    for (std::size_t j = d; j-- > 0;) {
      if (++idx[j] < cells) break;
      idx[j] = 0;
    }
  }
  return pts;
}

// Orders candidate vectors after the exact ground state and drops the one that
// lies in its span. Vectors are Euclidean (u = sqrt(pi) psi).
std::vector<std::vector<double>> orthonormal_modes(std::vector<double> ground,
                                                   const std::vector<std::vector<double>>& candidates,
                                                   std::size_t n_modes) {
  std::vector<std::vector<double>> out{std::move(ground)};
  for (const auto& v : candidates) {
    if (out.size() == n_modes) break;
    std::vector<double> w = v;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : out) {
        double dot = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) dot += w[i] * q[i];
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= dot * q[i];
      }
    }
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 0.5) continue;
    for (double& x : w) x /= norm;
    out.push_back(std::move(w));
  }
  if (out.size() < n_modes) throw NonConvergence("spectral solve: could not assemble orthonormal modes");
  return out;
}

struct Discrete {
  std::vector<double> points, h, energy, mass;
};

Discrete discretize(const Potential& u, const Box& box, std::size_t cells, double eps) {
  Discrete dsc;
  dsc.points = cell_centres(box, cells, dsc.h);
  const std::size_t d = box.lo.size();
  const std::size_t total = dsc.points.size() / d;
  dsc.energy.resize(total);
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < total; ++c) {
    dsc.energy[c] = u.energy_unchecked(dsc.points.data() + c * d);
    lowest = std::min(lowest, dsc.energy[c]);
  }
  dsc.mass.resize(total);
  double z = 0.0;
  for (std::size_t c = 0; c < total; ++c) z += dsc.mass[c] = std::exp(-(dsc.energy[c] - lowest) / eps);
  for (double& m : dsc.mass) m /= z;
  return dsc;
}

double boundary_mass(const Discrete& dsc, std::size_t cells, std::size_t d) {
  double s = 0.0;
  const std::size_t total = dsc.mass.size();
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t rem = c;
    bool edge = false;
    for (std::size_t j = 0; j < d; ++j) {
      const std::size_t k = rem % cells;
      rem /= cells;
      edge = edge || k == 0 || k + 1 == cells;
    }
    if (edge) s += dsc.mass[c];
  }
  return s;
}

void solve_1d(const Discrete& dsc, double eps, std::size_t n_modes, std::vector<double>& values,
              std::vector<std::vector<double>>& vectors) {
  const auto n = static_cast<lapack_int>(dsc.energy.size());
  const double h = dsc.h[0];
  const double root = std::sqrt(eps) / h;
  const auto& u = dsc.energy;

  std::vector<double> bd(static_cast<std::size_t>(n), 0.0), be(static_cast<std::size_t>(n), 0.0);
  for (std::size_t e = 0; e + 1 < u.size(); ++e) {
    const double r = (u[e + 1] - u[e]) / (4.0 * eps);
    bd[e] = root * std::exp(-r);
    be[e] = -root * std::exp(r);
  }
  double dummy = 0.0;
  lapack_int info = LAPACKE_dbdsqr(LAPACK_COL_MAJOR, 'U', n, 0, 0, 0, bd.data(), be.data(), &dummy, 1, &dummy, 1,
                                   &dummy, 1);
  if (info != 0) throw NonConvergence("dbdsqr failed with info " + std::to_string(info));
  values.resize(n_modes);
  for (std::size_t k = 0; k < n_modes; ++k) {
    const double s = bd[static_cast<std::size_t>(n) - 1 - k];
    values[k] = s * s;
  }

  const double off = -eps / (h * h);
  std::vector<double> diag(u.size()), sub(u.size(), off);
  for (std::size_t c = 0; c < u.size(); ++c) {
    double s = 0.0;
    if (c > 0) s += std::exp(-(u[c - 1] - u[c]) / (2.0 * eps));
    if (c + 1 < u.size()) s += std::exp(-(u[c + 1] - u[c]) / (2.0 * eps));
    diag[c] = eps / (h * h) * s;
  }
  const auto want = static_cast<lapack_int>(std::min<std::size_t>(n_modes + 1, u.size()));
  lapack_int found = 0;
  std::vector<double> w(u.size()), z(u.size() * static_cast<std::size_t>(want));
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(want));
  info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, diag.data(), sub.data(), 0.0, 0.0, 1, want, 0.0, &found,
                        w.data(), z.data(), n, support.data());
  if (info != 0) throw NonConvergence("dstevr failed with info " + std::to_string(info));
  vectors.clear();
  for (lapack_int k = 0; k < found; ++k) {
    vectors.emplace_back(z.begin() + k * n, z.begin() + (k + 1) * n);
  }
}

void solve_2d(const Discrete& dsc, std::size_t cells, double eps, std::size_t n_modes, std::vector<double>& values,
              std::vector<std::vector<double>>& vectors) {
  const std::size_t total = dsc.energy.size();
  const auto& u = dsc.energy;
  std::vector<double> a(total * total, 0.0);
  for (std::size_t c = 0; c < total; ++c) {
    const std::size_t ix = c / cells, iy = c % cells;
    const auto link = [&](std::size_t nb, double h) {
      const double k = eps / (h * h);
      a[c * total + c] += k * std::exp(-(u[nb] - u[c]) / (2.0 * eps));
      a[c * total + nb] = -k;
    };
    if (ix > 0) link(c - cells, dsc.h[0]);
    if (ix + 1 < cells) link(c + cells, dsc.h[0]);
    if (iy > 0) link(c - 1, dsc.h[1]);
    if (iy + 1 < cells) link(c + 1, dsc.h[1]);
  }
  const auto n = static_cast<lapack_int>(total);
  const auto want = static_cast<lapack_int>(std::min(n_modes + 1, total));
  lapack_int found = 0;
  std::vector<double> w(total), z(total * static_cast<std::size_t>(want));
  std::vector<lapack_int> support(2 * total);
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, a.data(), n, 0.0, 0.0, 1, want, 0.0,
                                         &found, w.data(), z.data(), n, support.data());
  if (info != 0) throw NonConvergence("dsyevr failed with info " + std::to_string(info));
  values.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(n_modes));
  values[0] = std::max(values[0], 0.0);
  vectors.clear();
  for (lapack_int k = 0; k < found; ++k) vectors.emplace_back(z.begin() + k * n, z.begin() + (k + 1) * n);
}

}  // namespace

SpectralSummary spectral_solve(const Potential& potential, double eps, const SpectralOptions& opts,
                               const LandscapeSummary* landscape) {
  const std::size_t d = potential.dimension();
  if (d > 2) throw InvalidArgument("spectral_solve supports d <= 2");
  if (opts.n_modes < 2 || opts.n_modes > 10) throw InvalidArgument("spectral_solve: n_modes must be in [2, 10]");
  SpectralSummary out;
  out.eps = eps;
  out.dim = d;
  out.cells = opts.cells ? opts.cells : (d == 1 ? 2000 : 41);
  out.box = reference_box(potential, eps);

  Discrete dsc;
  for (int attempt = 0;; ++attempt) {
    dsc = discretize(potential, out.box, out.cells, eps);
    out.boundary_mass = boundary_mass(dsc, out.cells, d);
    if (out.boundary_mass <= 1e-10) break;
    if (attempt == 5) throw NonConvergence("spectral_solve: boundary mass stays above 1e-10");
    for (std::size_t j = 0; j < d; ++j) {
      const double c = 0.5 * (out.box.lo[j] + out.box.hi[j]);
      const double half = 0.75 * (out.box.hi[j] - out.box.lo[j]);
      out.box.lo[j] = c - half;
      out.box.hi[j] = c + half;
    }
  }
  out.points = dsc.points;
  out.cell_mass = dsc.mass;

  std::vector<std::vector<double>> candidates;
  if (d == 1) {
    solve_1d(dsc, eps, opts.n_modes, out.eigenvalues, candidates);
  } else {
    solve_2d(dsc, out.cells, eps, opts.n_modes, out.eigenvalues, candidates);
  }
  std::vector<double> ground(dsc.mass.size());
  for (std::size_t c = 0; c < ground.size(); ++c) ground[c] = std::sqrt(dsc.mass[c]);
  const auto modes = orthonormal_modes(std::move(ground), candidates, opts.n_modes);

  std::size_t anchor = 0;
  double best = std::numeric_limits<double>::infinity();
  const auto& x1 = potential.minima().front().location;
  for (std::size_t c = 0; c < dsc.mass.size(); ++c) {
    double dist = 0.0;
    for (std::size_t j = 0; j < d; ++j) dist += std::pow(dsc.points[c * d + j] - x1[j], 2);
    if (dist < best) {
      best = dist;
      anchor = c;
    }
  }
  for (std::size_t k = 0; k < modes.size(); ++k) {
    std::vector<double> psi(modes[k].size());
    for (std::size_t c = 0; c < psi.size(); ++c) psi[c] = modes[k][c] / std::sqrt(dsc.mass[c]);
    if (k == 0) std::fill(psi.begin(), psi.end(), 1.0);
    if (k == 1 && psi[anchor] < 0.0) {
      for (double& v : psi) v = -v;
    }
    out.eigenfunctions.push_back(std::move(psi));
  }

  if (landscape) {
    const std::size_t wells = potential.minima().size();
    out.wells = wells;
    if (wells < opts.n_modes) out.gap = out.eigenvalues[wells];
    out.basin_mass.assign(wells, 0.0);
    for (std::size_t c = 0; c < dsc.mass.size(); ++c) {
      const std::span<const double> x(dsc.points.data() + c * d, d);
      const std::size_t i = landscape->basin_of(x);
      out.basin_mass[i] += dsc.mass[c];
      if (landscape->b_index(x, i)) out.c_psi = std::max(out.c_psi, std::abs(out.psi2()[c]));
    }
    if (wells == 2) {
      const double p1 = out.basin_mass[0], p2 = out.basin_mass[1];
      out.coefficients = {std::sqrt(p2 / p1), -std::sqrt(p1 / p2)};
    }
  }
  return out;
}

double eigenfunction_flatness(const SpectralSummary& summary, const LandscapeSummary& landscape) {
  if (summary.coefficients.size() != 2) throw InvalidArgument("eigenfunction_flatness: two-well summary required");
  const std::size_t d = summary.dim;
  double worst = 0.0;
  for (std::size_t c = 0; c < summary.cell_mass.size(); ++c) {
    const std::span<const double> x(summary.points.data() + c * d, d);
    if (const auto i = landscape.b_index(x)) {
      worst = std::max(worst, std::abs(summary.psi2()[c] - summary.coefficients[*i]));
    }
  }
  return worst;
}

double gaussian_kde(std::span<const double> samples, std::size_t dim, std::span<const double> x,
                    std::span<const double> bandwidth) {
  if (x.size() != dim || bandwidth.size() != dim) throw DimensionMismatch("gaussian_kde: dimension mismatch");
  for (double h : bandwidth) {
    if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("gaussian_kde: degenerate bandwidth");
  }
  const std::size_t n = samples.size() / dim;
  if (n == 0) throw InvalidArgument("gaussian_kde: no samples");
  double norm = 1.0;
  for (double h : bandwidth) norm *= h * std::sqrt(2.0 * std::numbers::pi);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double q = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double z = (x[j] - samples[i * dim + j]) / bandwidth[j];
      q += z * z;
    }
    s += std::exp(-0.5 * q);
  }
  return s / (static_cast<double>(n) * norm);
}

std::vector<double> silverman_bandwidth(std::span<const double> samples, std::size_t dim) {
  const std::size_t n = samples.size() / dim;
  if (n < 2) throw InvalidArgument("silverman_bandwidth: need at least two samples");
  const double factor =
      std::pow(4.0 / ((static_cast<double>(dim) + 2.0) * static_cast<double>(n)), 1.0 / (static_cast<double>(dim) + 4.0));
  std::vector<double> h(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += samples[i * dim + j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += std::pow(samples[i * dim + j] - mean, 2);
    var /= static_cast<double>(n - 1);
    h[j] = std::sqrt(var) * factor;
    if (!(h[j] > 0.0)) throw InvalidArgument("silverman_bandwidth: degenerate bandwidth (zero spread)");
  }
  return h;
}

namespace {

TransitionEstimate estimate_at(const Potential& potential, double eps, double t, std::span<const double> x,
                               std::span<const double> positions, const TransitionOptions& opts, double z) {
  const std::size_t d = potential.dimension();
  TransitionEstimate est;
  est.eps = eps;
  est.t = t;
  est.x.assign(x.begin(), x.end());
  est.n_runs = positions.size() / d;
  est.bandwidth = opts.bandwidth.empty() ? silverman_bandwidth(positions, d) : opts.bandwidth;
  est.density = gaussian_kde(positions, d, x, est.bandwidth);
  est.pi_x = std::exp(-potential.energy(x) / eps) / z;
  const auto bw = est.bandwidth;
  const Point centre = est.x;
  const TestFn kernel = [&](std::span<const double> y) {
    double q = 0.0, norm = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      q += std::pow((centre[j] - y[j]) / bw[j], 2);
      norm *= bw[j] * std::sqrt(2.0 * std::numbers::pi);
    }
    return std::exp(-0.5 * q) / norm;
  };
  QuadratureOptions qo;
  qo.rel_tol = 1e-7;
  est.pi_smoothed = grid_expectation(potential, eps, kernel, qo).value;
  est.ratio = est.density / est.pi_smoothed;
  est.c = potential.laplacian_bound();
  const double dd = static_cast<double>(d);
  est.bound = std::exp(potential.energy(x) / eps) * std::pow(1.0 - std::exp(-est.c * t / dd), -0.5 * dd);
  return est;
}

}  // namespace

std::vector<TransitionEstimate> transition_density_sweep(const Potential& potential, double eps,
                                                         std::span<const double> times, std::span<const double> x,
                                                         const TransitionOptions& opts) {
  const std::size_t d = potential.dimension();
  if (d > 2) throw InvalidArgument("transition density supports d <= 2");
  if (x.size() != d) throw DimensionMismatch("transition density: wrong base point dimension");
  if (opts.n_runs < 2) throw InvalidArgument("transition density: need at least two runs");
  const double z = grid_partition_function(potential, eps).value;
  std::vector<double> pos(opts.n_runs * d);
  for (std::size_t i = 0; i < opts.n_runs; ++i) std::copy(x.begin(), x.end(), pos.begin() + static_cast<std::ptrdiff_t>(i * d));
  std::vector<TransitionEstimate> out;
  double now = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    if (!(t > now)) throw InvalidArgument("transition density: times must be positive and increasing");
    LangevinParams lp;
    lp.temperature = eps;
    lp.total_time = t - now;
    lp.dt = std::min(opts.dt, t - now);
    lp.integrator = opts.integrator;
    lp.validate();
    kernels::propagate(opts.execution, potential, pos, lp, opts.seed, static_cast<std::uint32_t>(k + 1));
    now = t;
    out.push_back(estimate_at(potential, eps, t, x, pos, opts, z));
  }
  return out;
}

TransitionEstimate transition_density_diagonal(const Potential& potential, double eps, double t,
                                               std::span<const double> x, const TransitionOptions& opts) {
  const double times[] = {t};
  return transition_density_sweep(potential, eps, times, x, opts).front();
}

}  // namespace asmc
