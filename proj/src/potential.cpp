#include "asmc/potential.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>

#include "asmc/error.hpp"

namespace asmc {

namespace {

constexpr double kReferenceLevel = 40.0;

void check_dimension(std::size_t expected, std::size_t got) {
  if (expected != got) {
    throw DimensionMismatch("point has dimension " + std::to_string(got) + ", potential expects " +
                            std::to_string(expected));
  }
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

// ---------------------------------------------------------------------------

class Quartic final : public Potential {
 public:
  Quartic(const std::string& id, ParamMap params)
      : Potential(id, 1, params), tilt_(params.at("tilt")) {
    if (std::abs(tilt_) >= 0.5) {
      throw ConfigError("quartic: |tilt| must be < 0.5 to keep two minima");
    }
    finalize({{-1.0}, {1.0}});
    // Separatrix between the two wells, by Newton from the origin.
    double s = 0.0;
    for (int it = 0; it < 50; ++it) {
      const double g = 4.0 * s * (s * s - 1.0) + tilt_;
      const double h = 12.0 * s * s - 4.0;
      s -= g / h;
    }
    saddle_ = s;
  }

  std::optional<std::size_t> analytic_basin(std::span<const double> x) const override {
    const bool left = x[0] <= saddle_;
    // Minimum 0 is the left well unless the tilt is negative.
    const bool zero_is_left = minima()[0].location[0] < 0.0;
    return left == zero_is_left ? 0u : 1u;
  }

 protected:
  double raw_energy(const double* x) const override {
    const double q = x[0] * x[0] - 1.0;
    return q * q + tilt_ * (x[0] + 1.0);
  }
  void raw_gradient(const double* x, double* g) const override {
    g[0] = 4.0 * x[0] * (x[0] * x[0] - 1.0) + tilt_;
  }
  double raw_laplacian(const double* x) const override { return 12.0 * x[0] * x[0] - 4.0; }

 private:
  double tilt_;
  double saddle_ = 0.0;
};

class DoubleWell2d final : public Potential {
 public:
  explicit DoubleWell2d(ParamMap params)
      : Potential("double_well_2d", 2, params), omega_(params.at("omega")) {
    if (!(omega_ > 0.0)) throw ConfigError("double_well_2d: omega must be positive");
    finalize({{-1.0, 0.0}, {1.0, 0.0}}, {{0.0, 0.0}});
  }

  std::optional<std::size_t> analytic_basin(std::span<const double> x) const override {
    return x[0] <= 0.0 ? 0u : 1u;
  }

 protected:
  double raw_energy(const double* x) const override {
    const double q = x[0] * x[0] - 1.0;
    return q * q + 0.5 * omega_ * x[1] * x[1];
  }
  void raw_gradient(const double* x, double* g) const override {
    g[0] = 4.0 * x[0] * (x[0] * x[0] - 1.0);
    g[1] = omega_ * x[1];
  }
  double raw_laplacian(const double* x) const override { return 12.0 * x[0] * x[0] - 4.0 + omega_; }

 private:
  double omega_;
};

class TripleWell final : public Potential {
 public:
  explicit TripleWell(ParamMap params) : Potential("triple_well", 1, params), a_(params.at("a")) {
    const double barrier = params.at("barrier");
    if (!(a_ > 0.0) || !(barrier > 0.0)) {
      throw ConfigError("triple_well: a and barrier must be positive");
    }
    scale_ = barrier * 27.0 / (4.0 * std::pow(a_, 6));
    const double s = a_ / std::sqrt(3.0);
    finalize({{-a_}, {0.0}, {a_}}, {{-s}, {s}});
  }

  std::optional<std::size_t> analytic_basin(std::span<const double> x) const override {
    const double s = a_ / std::sqrt(3.0);
    const double target = x[0] <= -s ? -a_ : (x[0] <= s ? 0.0 : a_);
    std::size_t best = 0;
    for (std::size_t i = 1; i < minima().size(); ++i) {
      if (std::abs(minima()[i].location[0] - target) < std::abs(minima()[best].location[0] - target)) {
        best = i;
      }
    }
    return best;
  }

 protected:
  double raw_energy(const double* x) const override {
    const double q = x[0] * x[0] - a_ * a_;
    return scale_ * x[0] * x[0] * q * q;
  }
  void raw_gradient(const double* x, double* g) const override {
    const double x2 = x[0] * x[0];
    g[0] = 2.0 * scale_ * x[0] * (x2 - a_ * a_) * (3.0 * x2 - a_ * a_);
  }
  double raw_laplacian(const double* x) const override {
    const double x2 = x[0] * x[0];
    const double u = 3.0 * x2 - a_ * a_;
    return 2.0 * scale_ * (u * u + 6.0 * x2 * x2 - 6.0 * a_ * a_ * x2);
  }

 private:
  double a_;
  double scale_ = 1.0;
};

class Quadratic final : public Potential {
 public:
  explicit Quadratic(ParamMap params)
      : Potential("quadratic", static_cast<std::size_t>(params.at("dim")), params),
        omega_(params.at("omega")) {
    if (!(omega_ > 0.0)) throw ConfigError("quadratic: omega must be positive");
    finalize({Point(dimension(), 0.0)});
  }

  std::optional<std::size_t> analytic_basin(std::span<const double>) const override { return 0u; }

 protected:
  double raw_energy(const double* x) const override {
    double r2 = 0.0;
    for (std::size_t j = 0; j < dimension(); ++j) r2 += x[j] * x[j];
    return 0.5 * omega_ * r2;
  }
  void raw_gradient(const double* x, double* g) const override {
    for (std::size_t j = 0; j < dimension(); ++j) g[j] = omega_ * x[j];
  }
  double raw_laplacian(const double*) const override {
    return omega_ * static_cast<double>(dimension());
  }

 private:
  double omega_;
};

class GaussianMixture final : public Potential {
 public:
  explicit GaussianMixture(ParamMap params)
      : Potential("gaussian_mixture", static_cast<std::size_t>(params.at("dim")), params) {
    const double sep = params.at("sep");
    sigma_ = {params.at("sigma"), params.at("sigma2") > 0.0 ? params.at("sigma2") : params.at("sigma")};
    const double w = params.at("weight");
    if (!(sigma_[0] > 0.0) || !(sep > 0.0) || !(w > 0.0 && w < 1.0)) {
      throw ConfigError("gaussian_mixture: need sep > 0, sigma > 0, 0 < weight < 1");
    }
    const double d = static_cast<double>(dimension());
    for (int j = 0; j < 2; ++j) {
      mean_[j] = Point(dimension(), 0.0);
      mean_[j][0] = j == 0 ? -sep : sep;
      const double wj = j == 0 ? w : 1.0 - w;
      log_norm_[j] = std::log(wj) - 0.5 * d * std::log(2.0 * std::numbers::pi * sigma_[j] * sigma_[j]);
    }
    finalize({mean_[0], mean_[1]});
    const auto& m = minima();
    double gap = 0.0;
    for (std::size_t j = 0; j < dimension(); ++j) {
      gap += std::pow(m[0].location[j] - m[1].location[j], 2);
    }
    if (std::sqrt(gap) < 1e-3) {
      throw ConfigError("gaussian_mixture: components merge into a single well; increase sep");
    }
  }

 protected:
  double raw_energy(const double* x) const override {
    std::array<double, 2> l{};
    component_logs(x, l);
    const double mx = std::max(l[0], l[1]);
    return -(mx + std::log(std::exp(l[0] - mx) + std::exp(l[1] - mx)));
  }

  void raw_gradient(const double* x, double* g) const override {
    std::array<double, 2> l{};
    component_logs(x, l);
    const double mx = std::max(l[0], l[1]);
    const double e0 = std::exp(l[0] - mx), e1 = std::exp(l[1] - mx);
    const double p0 = e0 / (e0 + e1), p1 = e1 / (e0 + e1);
    for (std::size_t j = 0; j < dimension(); ++j) {
      g[j] = p0 * (x[j] - mean_[0][j]) / (sigma_[0] * sigma_[0]) +
             p1 * (x[j] - mean_[1][j]) / (sigma_[1] * sigma_[1]);
    }
  }

  double raw_laplacian(const double* x) const override {
    std::array<double, 2> l{};
    component_logs(x, l);
    const double mx = std::max(l[0], l[1]);
    const double e0 = std::exp(l[0] - mx), e1 = std::exp(l[1] - mx);
    const std::array<double, 2> p{e0 / (e0 + e1), e1 / (e0 + e1)};
    const double d = static_cast<double>(dimension());
    double trace = 0.0, second = 0.0, mean_sq = 0.0;
    Point gbar(dimension(), 0.0);
    for (int c = 0; c < 2; ++c) {
      const double inv = 1.0 / (sigma_[c] * sigma_[c]);
      trace += p[c] * d * inv;
      for (std::size_t j = 0; j < dimension(); ++j) {
        const double gj = (x[j] - mean_[c][j]) * inv;
        second += p[c] * gj * gj;
        gbar[j] += p[c] * gj;
      }
    }
    for (double v : gbar) mean_sq += v * v;
    return trace - (second - mean_sq);
  }

 private:
  void component_logs(const double* x, std::array<double, 2>& l) const {
    for (int c = 0; c < 2; ++c) {
      double r2 = 0.0;
      for (std::size_t j = 0; j < dimension(); ++j) r2 += std::pow(x[j] - mean_[c][j], 2);
      l[c] = log_norm_[c] - 0.5 * r2 / (sigma_[c] * sigma_[c]);
    }
  }

  std::array<Point, 2> mean_;
  std::array<double, 2> sigma_{};
  std::array<double, 2> log_norm_{};
};

const std::map<std::string, ParamMap>& registry() {
  static const std::map<std::string, ParamMap> r = {
      {"quartic", {{"tilt", 0.0}}},
      {"tilted_quartic", {{"tilt", 0.1}}},
      {"double_well_2d", {{"omega", 1.0}}},
      {"gaussian_mixture",
       {{"dim", 1.0}, {"sep", 1.0}, {"sigma", 0.5}, {"sigma2", 0.0}, {"weight", 0.5}}},
      {"triple_well", {{"a", 1.5}, {"barrier", 1.0}}},
      {"quadratic", {{"dim", 1.0}, {"omega", 1.0}}},
  };
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------

Potential::Potential(std::string id, std::size_t dim, ParamMap params)
    : id_(std::move(id)), dim_(dim), params_(std::move(params)) {
  if (dim_ == 0) throw ConfigError("potential dimension must be positive");
}

double Potential::energy(std::span<const double> x) const {
  check_dimension(dim_, x.size());
  return energy_unchecked(x.data());
}

Point Potential::gradient(std::span<const double> x) const {
  Point g(dim_);
  gradient(x, g);
  return g;
}

void Potential::gradient(std::span<const double> x, std::span<double> out) const {
  check_dimension(dim_, x.size());
  check_dimension(dim_, out.size());
  raw_gradient(x.data(), out.data());
}

double Potential::laplacian(std::span<const double> x) const {
  check_dimension(dim_, x.size());
  return raw_laplacian(x.data());
}

double Potential::raw_laplacian(const double* x) const {
  const auto h = hessian(std::span<const double>(x, dim_));
  double tr = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) tr += h[j * dim_ + j];
  return tr;
}

std::vector<double> Potential::hessian(std::span<const double> x) const {
  check_dimension(dim_, x.size());
  std::vector<double> h(dim_ * dim_);
  Point xp(x.begin(), x.end()), gp(dim_), gm(dim_);
  for (std::size_t j = 0; j < dim_; ++j) {
    const double step = 1e-5 * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + step;
    raw_gradient(xp.data(), gp.data());
    xp[j] = x[j] - step;
    raw_gradient(xp.data(), gm.data());
    xp[j] = x[j];
    for (std::size_t i = 0; i < dim_; ++i) h[i * dim_ + j] = (gp[i] - gm[i]) / (2.0 * step);
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = i + 1; j < dim_; ++j) {
      const double s = 0.5 * (h[i * dim_ + j] + h[j * dim_ + i]);
      h[i * dim_ + j] = h[j * dim_ + i] = s;
    }
  }
  return h;
}

std::optional<std::size_t> Potential::analytic_basin(std::span<const double>) const {
  return std::nullopt;
}

void Potential::finalize(const std::vector<Point>& minimum_seeds, std::vector<Point> saddles) {
  const auto n = static_cast<Eigen::Index>(dim_);
  std::vector<Minimum> found;
  for (const auto& seed : minimum_seeds) {
    check_dimension(dim_, seed.size());
    Point x = seed, g(dim_);
    for (int it = 0; it < 100; ++it) {
      raw_gradient(x.data(), g.data());
      double gn = 0.0;
      for (double v : g) gn = std::max(gn, std::abs(v));
      if (gn < 1e-14) break;
      const auto hv = hessian(x);
      Eigen::Map<const Eigen::MatrixXd> hm(hv.data(), n, n);
      Eigen::Map<const Eigen::VectorXd> gv(g.data(), n);
      const Eigen::VectorXd step = hm.ldlt().solve(gv);
      for (std::size_t j = 0; j < dim_; ++j) x[j] -= step(static_cast<Eigen::Index>(j));
    }
    const auto hv = hessian(x);
    Eigen::Map<const Eigen::MatrixXd> hm(hv.data(), n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hm);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      throw ConfigError(id_ + ": declared minimum is not a nondegenerate local minimum");
    }
    found.push_back({x, raw_energy(x.data())});
  }
  std::stable_sort(found.begin(), found.end(), [](const Minimum& a, const Minimum& b) {
    return a.energy < b.energy - 1e-12 * (1.0 + std::abs(b.energy));
  });
  shift_ = found.front().energy;
  for (auto& m : found) m.energy = std::max(0.0, m.energy - shift_);
  minima_ = std::move(found);
  declared_saddles_ = std::move(saddles);

  const Box box = sublevel_box(*this, kReferenceLevel);
  // Probe |Laplacian| on the reference box and |grad| on its boundary.
  const std::size_t per_axis = dim_ == 1 ? 2001 : (dim_ == 2 ? 81 : 21);
  std::size_t total = 1;
  for (std::size_t j = 0; j < dim_; ++j) total *= per_axis;
  Point x(dim_), g(dim_);
  double lap = 0.0, gmin = std::numeric_limits<double>::infinity();
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    bool boundary = false;
    for (std::size_t j = 0; j < dim_; ++j) {
      const std::size_t i = rem % per_axis;
      rem /= per_axis;
      boundary = boundary || i == 0 || i + 1 == per_axis;
      x[j] = box.lo[j] + (box.hi[j] - box.lo[j]) * static_cast<double>(i) / (per_axis - 1);
    }
    lap = std::max(lap, std::abs(raw_laplacian(x.data())));
    if (boundary) {
      raw_gradient(x.data(), g.data());
      double gn = 0.0;
      for (double v : g) gn += v * v;
      gmin = std::min(gmin, std::sqrt(gn));
    }
  }
  laplacian_bound_ = lap;
  gradient_liminf_ = gmin;
}

// ---------------------------------------------------------------------------

std::vector<std::string> builtin_potential_ids() {
  std::vector<std::string> ids;
  for (const auto& [id, _] : registry()) ids.push_back(id);
  return ids;
}

ParamMap builtin_potential_defaults(const std::string& id) {
  const auto it = registry().find(id);
  if (it == registry().end()) {
    throw ConfigError("unknown potential id '" + id + "'; valid ids: " + join(builtin_potential_ids()));
  }
  return it->second;
}

PotentialPtr make_potential(const std::string& id, const ParamMap& params) {
  ParamMap merged = builtin_potential_defaults(id);
  for (const auto& [key, value] : params) {
    if (!merged.contains(key)) {
      std::vector<std::string> names;
      for (const auto& [k, _] : merged) names.push_back(k);
      throw ConfigError("potential '" + id + "' has no parameter '" + key +
                        "'; valid parameters: " + join(names));
    }
    merged[key] = value;
  }
  if (merged.contains("dim")) {
    const double d = merged["dim"];
    if (d != std::floor(d) || d < 1 || d > 3) throw ConfigError(id + ": dim must be 1, 2 or 3");
  }
  if (id == "quartic" || id == "tilted_quartic") return std::make_shared<Quartic>(id, merged);
  if (id == "double_well_2d") return std::make_shared<DoubleWell2d>(merged);
  if (id == "triple_well") return std::make_shared<TripleWell>(merged);
  if (id == "quadratic") return std::make_shared<Quadratic>(merged);
  return std::make_shared<GaussianMixture>(merged);
}

Box sublevel_box(const Potential& potential, double level) {
  const std::size_t d = potential.dimension();
  Box box{Point(d), Point(d)};
  for (std::size_t j = 0; j < d; ++j) {
    box.lo[j] = box.hi[j] = potential.minima().front().location[j];
    for (const auto& m : potential.minima()) {
      box.lo[j] = std::min(box.lo[j], m.location[j]);
      box.hi[j] = std::max(box.hi[j], m.location[j]);
    }
  }
  const std::size_t probes = d == 1 ? 1 : (d == 2 ? 129 : 33);

  // True when U <= level somewhere on the face x_axis = pos of `b`.
  auto face_reaches = [&](const Box& b, std::size_t axis, double pos) {
    std::size_t total = 1;
    for (std::size_t j = 0; j + 1 < d; ++j) total *= probes;
    Point x(d);
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rem = flat;
      for (std::size_t j = 0; j < d; ++j) {
        if (j == axis) {
          x[j] = pos;
          continue;
        }
        const std::size_t i = rem % probes;
        rem /= probes;
        x[j] = b.lo[j] + (b.hi[j] - b.lo[j]) * static_cast<double>(i) / (probes - 1);
      }
      if (potential.energy_unchecked(x.data()) <= level) return true;
    }
    return false;
  };

  for (int sweep = 0;; ++sweep) {
    if (sweep > 200) throw NonConvergence("sublevel_box: sublevel set appears unbounded");
    bool grew = false;
    for (std::size_t j = 0; j < d; ++j) {
      for (int side = 0; side < 2; ++side) {
        double& pos = side == 0 ? box.lo[j] : box.hi[j];
        const double dir = side == 0 ? -1.0 : 1.0;
        double step = 0.05 + 0.1 * (box.hi[j] - box.lo[j]);
        while (face_reaches(box, j, pos)) {
          pos += dir * step;
          step *= 1.5;
          grew = true;
        }
      }
    }
    if (!grew) break;
  }
  // Pull each face back to the crossing.
  for (std::size_t j = 0; j < d; ++j) {
    for (int side = 0; side < 2; ++side) {
      double outside = side == 0 ? box.lo[j] : box.hi[j];
      double inside = potential.minima().front().location[j];
      for (const auto& m : potential.minima()) {
        inside = side == 0 ? std::min(inside, m.location[j]) : std::max(inside, m.location[j]);
      }
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (inside + outside);
        if (face_reaches(box, j, mid)) {
          inside = mid;
        } else {
          outside = mid;
        }
      }
      (side == 0 ? box.lo[j] : box.hi[j]) = outside;
    }
  }
  return box;
}

}  // namespace asmc
