#pragma once

#include <stdexcept>
#include <vector>

// Pointwise evaluation of the interacting-particle model: the desingularizing
// weights psi_eps / phi_eps = psi_eps + 1, the two drift fields, their analytic
// majorant, the conjugated potential and the radial statistic.  All weight
// arithmetic is carried in the log domain; psi/(psi+1) factors go through a
// stable sigmoid so configurations arbitrarily close to a collision evaluate
// without overflow.

namespace kslab {

struct SingularConfiguration : std::domain_error {
  using std::domain_error::domain_error;
};

// Physical and regularization parameters: d-dimensional particles, N of them,
// attraction strength nu >= 0, regularization epsilon >= 0.
struct SystemParams {
  int d = 2;
  int n_particles = 2;
  double nu = 0.0;
  double epsilon = 0.0;

  void validate() const;
  int dim() const { return d * n_particles; }
  // nu/N and nu(N-1)/2: derived, never stored.
  double pair_exponent() const { return nu / n_particles; }
  double scaling_exponent() const { return nu * (n_particles - 1) / 2.0; }
};

// A point x in R^{dN}, stored as N contiguous blocks of d coordinates.
struct Configuration {
  int d = 0;
  int n_particles = 0;
  std::vector<double> coords;  // size d * n_particles, block i = particle i

  static Configuration zeros(int d, int n_particles);
  double* block(int i) { return coords.data() + static_cast<std::size_t>(i) * d; }
  const double* block(int i) const {
    return coords.data() + static_cast<std::size_t>(i) * d;
  }
  int dim() const { return d * n_particles; }
  void validate() const;
};

// Squared pair distances |x^i-x^j|^2 (and the epsilon-shifted variant), indexed
// above the diagonal; computed once per configuration and shared by evaluators.
struct PairDistances {
  int n_particles = 0;
  std::vector<double> r2;     // |x^i-x^j|^2, i<j
  std::vector<double> r2eps;  // r2 + epsilon

  std::size_t index(int i, int j) const;  // requires i < j
};

PairDistances compute_pair_distances(const Configuration& x, const SystemParams& p);

// log psi_eps(x) = -(nu/(2N)) sum_{i<j} log(|x^i-x^j|^2 + eps).
// Throws SingularConfiguration when eps = 0 and a pair coincides exactly.
double log_psi_eps(const Configuration& x, const SystemParams& p);
double log_psi_eps(const PairDistances& pd, const SystemParams& p);

// phi_eps = psi_eps + 1 >= 1; saturates (with flag) when log psi_eps exceeds
// the double range.
struct PhiValue {
  double value = 1.0;
  bool overflowed = false;
};
PhiValue phi_eps(const Configuration& x, const SystemParams& p);
PhiValue phi_eps_from_log(double log_psi);

// Drift of the psi-system: block i = -(nu/N) sum_{j!=i} (x^i-x^j)/|x^i-x^j|^2_eps.
std::vector<double> drift_psi(const Configuration& x, const SystemParams& p);

// Drift of the phi-system: the psi drift scaled by psi/(psi+1), the scale
// computed as sigmoid(log psi_eps).
std::vector<double> drift_phi(const Configuration& x, const SystemParams& p);

// Per-particle bound (nu/N) sum_{j!=i} 1/|x^i-x^j| dominating the block norms
// of both drifts; verified against them on every call.  Throws
// SingularConfiguration ("majorant infinite") on a coincident pair.
std::vector<double> drift_majorant(const Configuration& x, const SystemParams& p);

// U_eps = (psi_eps+1)^{-1} div(grad psi_eps / psi_eps), together with the raw
// divergence and its pointwise bound (d nu/N) sum_i sum_{j!=i} 1/|x^i-x^j|^2_eps.
// Requires eps > 0 (the closed form uses |.|_eps).
struct PotentialValue {
  double u = 0.0;
  double divergence = 0.0;
  double bound = 0.0;
};
PotentialValue potential_u(const Configuration& x, const SystemParams& p);

// R(x) = (1/(4N)) sum_{i,j} |x^i-x^j|^2.
double radial_statistic(const Configuration& x);

// Maximum and minimum pair distance (not squared).
double min_pair_distance(const Configuration& x);
double max_pair_distance(const Configuration& x);

}  // namespace kslab
