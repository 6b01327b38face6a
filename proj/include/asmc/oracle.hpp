#ifndef ASMC_ORACLE_HPP
#define ASMC_ORACLE_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "asmc/dynamics.hpp"
#include "asmc/kernels.hpp"
#include "asmc/landscape.hpp"
#include "asmc/potential.hpp"

// Ground truth computed without the sampler: quadrature of Gibbs integrals,
// a finite-volume eigensolver for the generator L f = -eps Lap f + grad U . grad f,
// and Monte Carlo estimates of the transition density on the diagonal.

namespace asmc {

using TestFn = std::function<double(std::span<const double>)>;

/// Integration box: the sublevel box {U <= 40 eps} padded by 20% per side.
Box reference_box(const Potential& potential, double eps);

/// Composite Simpson weights for n (odd) equally spaced nodes with spacing h.
std::vector<double> simpson_weights(std::size_t n, double h);

struct QuadratureOptions {
  double rel_tol = 1e-6;
  /// Initial node count per axis is 2^min_level + 1, doubled up to 2^max_level + 1.
  int min_level = 6;
  int max_level = 0;  ///< 0 picks a dimension-dependent cap (20, 11, 7)
};

struct QuadratureResult {
  double value = 0.0;
  std::size_t nodes = 0;  ///< per axis at convergence
  double rel_change = 0.0;
};

/// Z_eps = int exp(-U/eps) over the reference box. d <= 3.
/// Throws NonConvergence when doubling stalls before rel_tol.
QuadratureResult grid_partition_function(const Potential& potential, double eps, const QuadratureOptions& opts = {});

/// int h dpi_eps. Converged when successive refinements differ by rel_tol * (1 + |value|).
QuadratureResult grid_expectation(const Potential& potential, double eps, const TestFn& h,
                                  const QuadratureOptions& opts = {});

/// Laplace approximation sum_i (2 pi eps)^(d/2) / sqrt(det Hess U(x_i)) exp(-U(x_i)/eps).
double laplace_asymptotic_z(const Potential& potential, double eps);

struct GibbsReference {
  double eps = 0.0;
  Box box;
  double z = 0.0;
  std::size_t nodes = 0;  ///< density nodes per axis
  std::vector<double> density;  ///< normalized pi_eps on the tensor grid over `box`, row-major
  std::vector<double> well_masses;  ///< pi_eps(Omega_i)
  std::vector<double> b_masses;     ///< pi_eps(B_i)
  double mass_outside_k = 0.0;      ///< pi_eps(K^c)
  double c_m = 0.0;                 ///< max_i pi_eps(Omega_i)^(-1/2)
  /// Largest relative change of Z and absolute change of the masses in the final refinement.
  double refinement_change = 0.0;
};

/// Well masses, K^c mass and Z. In one dimension the domain is split at the
/// saddles and at the B_i boundaries so that every piece has a smooth integrand;
/// in higher dimension basin and K membership are evaluated per node.
GibbsReference gibbs_reference(const LandscapeSummary& landscape, double eps, const QuadratureOptions& opts = {},
                               std::size_t density_nodes = 513);

struct WellMasses {
  std::vector<double> masses;
  double outside_k = 0.0;
};
WellMasses well_masses(const LandscapeSummary& landscape, double eps, const QuadratureOptions& opts = {});

struct SpectralOptions {
  /// Cells per axis; 0 picks 2000 (d = 1) or 41 (d = 2).
  std::size_t cells = 0;
  std::size_t n_modes = 4;
};

struct SpectralSummary {
  double eps = 0.0;
  std::size_t dim = 1;
  Box box;
  std::size_t cells = 0;  ///< per axis
  std::vector<double> points;     ///< cell centres, row-major (cells^d x d)
  std::vector<double> cell_mass;  ///< discrete pi_eps per cell, sums to 1
  std::vector<double> eigenvalues;  ///< ascending, n_modes entries
  /// eigenfunctions[k][c]: psi_{k+1} at cell c, orthonormal in L2(pi_eps).
  std::vector<std::vector<double>> eigenfunctions;
  std::size_t wells = 0;      ///< J (0 without a landscape)
  double gap = 0.0;           ///< Lambda = lambda_{J+1} (0 when unavailable)
  std::vector<double> basin_mass;    ///< discrete pi_eps(Omega_i)
  std::vector<double> coefficients;  ///< a_i, two-well case only
  double c_psi = 0.0;                ///< sup over K-cells of |psi_2|
  double boundary_mass = 0.0;

  const std::vector<double>& psi2() const { return eigenfunctions.at(1); }
};

/// Eigenpairs of L_eps on the reference box with reflecting boundaries.
/// Finite volumes with edge weights sqrt(pi_i pi_j). d = 1: eigenvalues are
/// squared singular values of the bidiagonal factor (dbdsqr), eigenvectors
/// from the tridiagonal solver (dstevr). d = 2: dense symmetric solver (dsyevr).
/// psi_1 is the exact constant, psi_2 is signed positive at x_min,1. The
/// landscape, when given, enables basin masses, a_i, Lambda and C_psi.
SpectralSummary spectral_solve(const Potential& potential, double eps, const SpectralOptions& opts = {},
                               const LandscapeSummary* landscape = nullptr);

/// max_i sup over cells in B_i of |psi_2 - a_i|. Two-well summaries only.
double eigenfunction_flatness(const SpectralSummary& summary, const LandscapeSummary& landscape);

struct TransitionOptions {
  std::size_t n_runs = 20000;
  double dt = 1e-2;
  std::uint64_t seed = 0;
  /// Per-axis KDE bandwidth; empty selects Silverman's rule per axis.
  std::vector<double> bandwidth;
  Integrator integrator = Integrator::kUla;
  kernels::Execution execution = kernels::Execution::kParallel;
};

struct TransitionEstimate {
  double eps = 0.0;
  double t = 0.0;
  Point x;
  std::size_t n_runs = 0;
  std::vector<double> bandwidth;
  double density = 0.0;      ///< KDE of p_{eps,t}(x, .) at x
  double pi_x = 0.0;         ///< pi_eps(x)
  double pi_smoothed = 0.0;  ///< pi_eps convolved with the same kernel, at x
  double ratio = 0.0;        ///< density / pi_smoothed
  double c = 0.0;            ///< Laplacian bound used below
  /// exp(U(x)/eps) (1 - exp(-c t / d))^(-d/2), i.e. the bound with C_p = 1.
  double bound = 0.0;
};

/// Product Gaussian KDE at x of the n points in `samples` (n x d, row-major).
/// Throws InvalidArgument for a non-positive bandwidth.
double gaussian_kde(std::span<const double> samples, std::size_t dim, std::span<const double> x,
                    std::span<const double> bandwidth);
/// Silverman's rule per axis: sigma_j (4 / ((d + 2) n))^(1 / (d + 4)).
std::vector<double> silverman_bandwidth(std::span<const double> samples, std::size_t dim);

/// n_runs independent Langevin paths from x for time t, KDE at x.
TransitionEstimate transition_density_diagonal(const Potential& potential, double eps, double t, std::span<const double> x,
                                               const TransitionOptions& opts = {});

/// Same estimate at increasing times along one set of paths: the ensemble is
/// advanced from one time to the next, so later times reuse the earlier paths.
std::vector<TransitionEstimate> transition_density_sweep(const Potential& potential, double eps,
                                                         std::span<const double> times, std::span<const double> x,
                                                         const TransitionOptions& opts = {});

}  // namespace asmc

#endif  // ASMC_ORACLE_HPP
