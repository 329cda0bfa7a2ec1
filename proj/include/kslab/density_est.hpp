#pragma once

#include <optional>
#include <vector>

#include "kslab/sde_sim.hpp"

// Nonparametric estimation of the transition density from simulated ensembles
// and empirical fitting of the weighted heat-kernel bounds.  The estimator is
// a product Gaussian KDE with per-coordinate Silverman bandwidths; by default a
// two-bandwidth Richardson step (2 p_h - p_{sqrt2 h}) removes the O(h^2)
// smoothing bias, which plain Silverman cannot afford in dimension four at
// desk-scale sample counts.  Stopped trajectories are treated as absorbed
// mass: they are excluded from the kernel sum but kept in the denominator, so
// estimates of stopped ensembles integrate to the surviving fraction.

namespace kslab {

struct DensityEstimate {
  std::vector<Configuration> query_points;
  std::vector<double> values;     // p_hat >= 0 per query point
  std::vector<double> std_error;  // per-point Monte Carlo standard error
  std::vector<double> bandwidth;  // base bandwidth per coordinate
  int m_total = 0;                // denominator (all trajectories)
  int m_used = 0;                 // surviving trajectories in the kernel sum
  bool bias_corrected = true;
};

enum class BoundKind { thm1, thm2, thm3 };

struct BoundFit {
  BoundKind kind = BoundKind::thm1;
  double fitted_constant = 0.0;
  std::optional<double> fitted_c4;  // thm2 only
  Configuration sup_point;
  std::vector<int> excluded;  // query indices where phi_eps overflowed
};

// Gaussian-kernel density estimate at the query points.  `bandwidth_override`,
// when set, replaces the Silverman per-coordinate bandwidths by a single
// scalar.  Requires M >= 1000 and ensemble.spec.t_end == t.
DensityEstimate estimate_density(const Ensemble& ensemble, double t,
                                 const std::vector<Configuration>& query,
                                 std::optional<double> bandwidth_override = std::nullopt,
                                 bool bias_correct = true);

// Gamma_t(x-y) = (4 pi t)^{-dN/2} exp(-|x-y|^2/(4t)).
double gaussian_reference(double t, const Configuration& x, const Configuration& y);

// Fits the constant of the selected bound shape:
//   thm1: p_hat <= C t^{-N}     phi_eps(y)      (d = 2)
//   thm2: p_hat <= C Gamma_{c4 t}(x-y) phi_eps(y) (d >= 3; c4 from a candidate set)
//   thm3: p_hat <= C t^{-dN/2}  phi_eps(y)      (d >= 3)
// fitted_constant = sup over query points of p_hat / shape; points where
// phi_eps saturates are excluded and reported.
BoundFit fit_bound(const DensityEstimate& est, double t, const SystemParams& p,
                   BoundKind kind, const Configuration& x,
                   const std::vector<double>& c4_candidates = {2.0, 4.0, 8.0, 16.0});

// q_hat(y) = p_hat(y) / phi_eps(y) per query point.
std::vector<double> weighted_kernel(const DensityEstimate& est, const SystemParams& p);

// Exact integral of the KDE over the axis-aligned box [lo, hi]^dim (per-axis
// Gaussian CDF differences; no grid).
double kde_mass_in_box(const Ensemble& ensemble, double lo, double hi,
                       bool bias_correct = true);

// Query-set builders.
// Line transect from y(s) moving particles 0 and 1 symmetrically to separation
// s while keeping their midpoint and all other particles fixed at `base`;
// s runs over `separations`.
std::vector<Configuration> transect_queries(const Configuration& base,
                                            const std::vector<double>& separations);
// Coarse lattice around x: per-coordinate offsets in {-span, 0, +span} limited
// to `max_points` (cycled deterministically for dN > small).
std::vector<Configuration> lattice_queries(const Configuration& x, double span,
                                           int points_per_axis, int max_points = 729);

}  // namespace kslab
