#include "asmc/landscape.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numeric>

#include "asmc/error.hpp"

namespace asmc {

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hessian_eigen(const Potential& u,
                                                             std::span<const double> x) {
  const auto n = static_cast<Eigen::Index>(u.dimension());
  const auto h = u.hessian(x);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Eigen::Map<const Eigen::MatrixXd>(h.data(), n, n));
}

std::optional<std::size_t> nearest_minimum(const Potential& u, std::span<const double> y, double radius) {
  for (std::size_t i = 0; i < u.minima().size(); ++i) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) d2 += std::pow(y[j] - u.minima()[i].location[j], 2);
    if (std::sqrt(d2) <= radius) return i;
  }
  return std::nullopt;
}

BasinResult descend(const Potential& u, std::span<const double> x, const FlowParams& p, bool allow_split) {
  const std::size_t d = u.dimension();
  if (x.size() != d) throw DimensionMismatch("classify_basin: wrong point dimension");
  for (double v : x) {
    if (!std::isfinite(v)) throw InvalidArgument("classify_basin: non-finite point");
  }
  Point y(x.begin(), x.end()), g(d), trial(d);
  double energy = u.energy_unchecked(y.data());
  double step = 0.1;
  std::size_t steps = 0;
  bool converged = false;
  for (; steps < p.max_steps; ++steps) {
    u.gradient_unchecked(y.data(), g.data());
    const double gn = norm(g);
    if (gn < p.grad_tol) {
      converged = true;
      break;
    }
    step = std::min(step, p.max_displacement / gn);
    bool moved = false;
    while (step * gn > 1e-300) {
      for (std::size_t j = 0; j < d; ++j) trial[j] = y[j] - step * g[j];
      if (trial == y) break;  // below floating-point resolution
      const double e = u.energy_unchecked(trial.data());
      if (e < energy && e <= energy - 1e-4 * step * gn * gn) {
        y.swap(trial);
        energy = e;
        moved = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      // No descent possible in floating point: treat as a critical point.
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NonConvergence("classify_basin: descent flow did not converge within " +
                         std::to_string(p.max_steps) + " steps");
  }
  if (auto idx = nearest_minimum(u, y, p.snap_radius)) {
    return {*idx, false, y, steps};
  }
  const auto es = hessian_eigen(u, y);
  if (allow_split && es.eigenvalues()(0) < 0.0) {
    // Separatrix: split along the unstable direction, keep the lowest basin.
    const Eigen::VectorXd v = es.eigenvectors().col(0);
    std::size_t best = u.minima().size();
    for (double sign : {-1.0, 1.0}) {
      Point z = y;
      for (std::size_t j = 0; j < d; ++j) z[j] += sign * 1e-4 * v(static_cast<Eigen::Index>(j));
      best = std::min(best, descend(u, z, p, false).index);
    }
    return {best, true, y, steps};
  }
  throw NonConvergence("classify_basin: flow stopped at a critical point that is not a declared minimum");
}

// Polishes a 1-d local maximum of U by Newton on U' inside [lo, hi].
double refine_max_1d(const Potential& u, double lo, double hi, double guess) {
  double s = guess;
  for (int it = 0; it < 100; ++it) {
    double g = 0.0;
    u.gradient_unchecked(&s, &g);
    const double h = u.hessian(std::span<const double>(&s, 1))[0];
    if (h >= 0.0) break;
    const double next = std::clamp(s - g / h, lo, hi);
    if (std::abs(next - s) < 1e-15 * (1.0 + std::abs(s))) {
      s = next;
      break;
    }
    s = next;
  }
  return s;
}

Point newton_critical_point(const Potential& u, Point x) {
  const std::size_t d = u.dimension();
  const auto n = static_cast<Eigen::Index>(d);
  Point g(d);
  for (int it = 0; it < 100; ++it) {
    u.gradient_unchecked(x.data(), g.data());
    if (norm(g) < 1e-13) return x;
    const auto h = u.hessian(x);
    const Eigen::VectorXd step =
        Eigen::Map<const Eigen::MatrixXd>(h.data(), n, n).fullPivLu().solve(Eigen::Map<const Eigen::VectorXd>(g.data(), n));
    for (std::size_t j = 0; j < d; ++j) x[j] -= step(static_cast<Eigen::Index>(j));
  }
  u.gradient_unchecked(x.data(), g.data());
  if (norm(g) > 1e-8) throw NonConvergence("landscape_summary: no saddle found (Newton failed)");
  return x;
}

void check_index_one(const Potential& u, const Point& s) {
  const auto es = hessian_eigen(u, s);
  const auto& ev = es.eigenvalues();
  const bool ok = ev(0) < 0.0 && (ev.size() == 1 || ev(1) > 0.0);
  if (!ok) throw InvalidArgument("landscape_summary: degenerate saddle (Hessian is not index one)");
}

std::pair<std::size_t, std::size_t> adjacent_basins(const Potential& u, const Point& s, const FlowParams& p) {
  const auto es = hessian_eigen(u, s);
  const Eigen::VectorXd v = es.eigenvectors().col(0);
  std::array<std::size_t, 2> idx{};
  for (int k = 0; k < 2; ++k) {
    Point z = s;
    for (std::size_t j = 0; j < z.size(); ++j) z[j] += (k == 0 ? -1e-4 : 1e-4) * v(static_cast<Eigen::Index>(j));
    idx[k] = descend(u, z, p, false).index;
  }
  return {std::min(idx[0], idx[1]), std::max(idx[0], idx[1])};
}

}  // namespace

BasinResult classify_basin(const Potential& potential, std::span<const double> x, const FlowParams& params) {
  return descend(potential, x, params, true);
}

std::size_t LandscapeSummary::basin_of(std::span<const double> x) const {
  if (auto i = potential->analytic_basin(x)) return *i;
  return classify_basin(*potential, x, flow).index;
}

std::optional<std::size_t> LandscapeSummary::b_index(std::span<const double> x, std::size_t basin) const {
  const double u = potential->energy(x);
  if (u - potential->minima()[basin].energy <= b_threshold) return basin;
  return std::nullopt;
}

std::optional<std::size_t> LandscapeSummary::b_index(std::span<const double> x) const {
  // Points above every threshold cannot be in K; skip the basin lookup.
  const double u = potential->energy(x);
  double highest = 0.0;
  for (const auto& m : potential->minima()) highest = std::max(highest, m.energy);
  if (u - highest > b_threshold) return std::nullopt;
  return b_index(x, basin_of(x));
}

bool LandscapeSummary::in_b(std::size_t i, std::span<const double> x) const {
  const auto b = b_index(x);
  return b && *b == i;
}

LandscapeSummary landscape_summary(PotentialPtr potential, double alpha, const FlowParams& flow) {
  if (!(alpha > 0.0)) throw InvalidArgument("landscape_summary: alpha must be positive");
  const Potential& u = *potential;
  const auto& minima = u.minima();
  if (minima.size() < 2) throw InvalidArgument("landscape_summary: potential needs at least two minima");

  LandscapeSummary out;
  out.potential = potential;
  out.alpha = alpha;
  out.flow = flow;

  if (u.dimension() == 1) {
    std::vector<std::size_t> order(minima.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](auto a, auto b) { return minima[a].location[0] < minima[b].location[0]; });
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      const double lo = minima[order[k]].location[0];
      const double hi = minima[order[k + 1]].location[0];
      constexpr int kGrid = 4001;
      double best_x = lo, best_u = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < kGrid; ++i) {
        const double x = lo + (hi - lo) * i / (kGrid - 1);
        const double e = u.energy_unchecked(&x);
        if (e > best_u) {
          best_u = e;
          best_x = x;
        }
      }
      const double s = refine_max_1d(u, lo, hi, best_x);
      Point sp{s};
      check_index_one(u, sp);
      out.saddles.push_back({std::min(order[k], order[k + 1]), std::max(order[k], order[k + 1]), sp,
                             u.energy_unchecked(&s)});
    }
    // Minimax path from minimum 0 to minimum 1 crosses every saddle between them.
    const double a = std::min(minima[0].location[0], minima[1].location[0]);
    const double b = std::max(minima[0].location[0], minima[1].location[0]);
    bool first = true;
    for (const auto& s : out.saddles) {
      if (s.location[0] > a && s.location[0] < b && (first || s.energy > out.primary_saddle.energy)) {
        out.primary_saddle = s;
        first = false;
      }
    }
  } else {
    std::vector<Point> candidates = u.declared_saddles();
    if (candidates.empty()) {
      if (minima.size() != 2) {
        throw InvalidArgument("landscape_summary: saddle search in d > 1 needs declared saddles for more than two minima");
      }
      const auto& p = minima[0].location;
      const auto& q = minima[1].location;
      constexpr int kGrid = 2001;
      Point best(p.size()), x(p.size());
      double best_u = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < kGrid; ++i) {
        const double t = static_cast<double>(i) / (kGrid - 1);
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = p[j] + t * (q[j] - p[j]);
        const double e = u.energy_unchecked(x.data());
        if (e > best_u) {
          best_u = e;
          best = x;
        }
      }
      candidates.push_back(newton_critical_point(u, best));
    }
    for (const auto& s : candidates) {
      check_index_one(u, s);
      const auto [from, to] = adjacent_basins(u, s, flow);
      if (from == to) throw InvalidArgument("landscape_summary: saddle does not separate two basins");
      out.saddles.push_back({from, to, s, u.energy(s)});
    }
    bool first = true;
    for (const auto& s : out.saddles) {
      if (s.from == 0 && s.to == 1 && (first || s.energy < out.primary_saddle.energy)) {
        out.primary_saddle = s;
        first = false;
      }
    }
    if (first) throw NonConvergence("landscape_summary: no saddle found between minima 1 and 2");
  }
  if (out.saddles.empty()) throw NonConvergence("landscape_summary: no saddle found");

  out.saddle_height = out.primary_saddle.energy;
  double barrier = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < minima.size(); ++i) {
    double lowest_exit = std::numeric_limits<double>::infinity();
    for (const auto& s : out.saddles) {
      if (s.from == i || s.to == i) lowest_exit = std::min(lowest_exit, s.energy);
    }
    barrier = std::min(barrier, lowest_exit - minima[i].energy);
  }
  out.energy_barrier = barrier;
  out.barrier_ratio = out.saddle_height / out.energy_barrier;
  out.b_threshold = barrier / std::pow(1.0 + alpha, 0.25);
  out.c_k = barrier / std::sqrt(1.0 + alpha);
  return out;
}

}  // namespace asmc
