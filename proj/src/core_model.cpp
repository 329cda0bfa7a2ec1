#include "kslab/core_model.hpp"

#include <cmath>
#include <limits>

#include "kslab/numerics.hpp"

namespace kslab {

void SystemParams::validate() const {
  if (d < 2) throw std::invalid_argument("SystemParams: d must be >= 2");
  if (n_particles < 2) throw std::invalid_argument("SystemParams: N must be >= 2");
  if (!(nu >= 0.0)) throw std::invalid_argument("SystemParams: nu must be >= 0");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("SystemParams: epsilon must be >= 0");
}

Configuration Configuration::zeros(int d, int n_particles) {
  Configuration x;
  x.d = d;
  x.n_particles = n_particles;
  x.coords.assign(static_cast<std::size_t>(d) * n_particles, 0.0);
  return x;
}

void Configuration::validate() const {
  if (d < 1 || n_particles < 1 ||
      coords.size() != static_cast<std::size_t>(d) * n_particles) {
    throw std::invalid_argument("Configuration: coords size != d*N");
  }
}

std::size_t PairDistances::index(int i, int j) const {
  // upper-triangular row-major: pairs (0,1),(0,2),...,(0,N-1),(1,2),...
  return static_cast<std::size_t>(i) * (2 * n_particles - i - 1) / 2 + (j - i - 1);
}

namespace {

void check_compat(const Configuration& x, const SystemParams& p) {
  p.validate();
  x.validate();
  if (x.d != p.d || x.n_particles != p.n_particles) {
    throw std::invalid_argument("Configuration does not match SystemParams (d, N)");
  }
}

}  // namespace

PairDistances compute_pair_distances(const Configuration& x, const SystemParams& p) {
  check_compat(x, p);
  const int n = p.n_particles;
  PairDistances pd;
  pd.n_particles = n;
  pd.r2.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  pd.r2eps.reserve(pd.r2.capacity());
  for (int i = 0; i < n; ++i) {
    const double* xi = x.block(i);
    for (int j = i + 1; j < n; ++j) {
      const double* xj = x.block(j);
      double r2 = 0.0;
      for (int c = 0; c < p.d; ++c) {
        const double dc = xi[c] - xj[c];
        r2 += dc * dc;
      }
      pd.r2.push_back(r2);
      pd.r2eps.push_back(r2 + p.epsilon);
    }
  }
  return pd;
}

double log_psi_eps(const PairDistances& pd, const SystemParams& p) {
  double sum_log = 0.0;
  for (std::size_t k = 0; k < pd.r2eps.size(); ++k) {
    if (pd.r2eps[k] <= 0.0) {
      throw SingularConfiguration("singular configuration: coincident pair at epsilon = 0");
    }
    sum_log += std::log(pd.r2eps[k]);
  }
  return -(p.nu / (2.0 * p.n_particles)) * sum_log;
}

double log_psi_eps(const Configuration& x, const SystemParams& p) {
  return log_psi_eps(compute_pair_distances(x, p), p);
}

PhiValue phi_eps_from_log(double log_psi) {
  PhiValue out;
  // exp overflows past ~709.78; saturate rather than produce inf.
  if (log_psi > std::log(std::numeric_limits<double>::max())) {
    out.value = std::numeric_limits<double>::max();
    out.overflowed = true;
    return out;
  }
  out.value = std::exp(log_psi) + 1.0;
  return out;
}

PhiValue phi_eps(const Configuration& x, const SystemParams& p) {
  return phi_eps_from_log(log_psi_eps(x, p));
}

namespace {

// Common kernel of the two drifts: block i accumulates
// scale * (nu/N) sum_{j!=i} (x^i-x^j)/r2eps_ij.
std::vector<double> drift_impl(const Configuration& x, const SystemParams& p,
                               const PairDistances& pd, double scale) {
  const int n = p.n_particles, d = p.d;
  std::vector<double> b(static_cast<std::size_t>(n) * d, 0.0);
  const double pref = -scale * p.nu / n;
  for (int i = 0; i < n; ++i) {
    const double* xi = x.block(i);
    for (int j = i + 1; j < n; ++j) {
      const double* xj = x.block(j);
      const double r2e = pd.r2eps[pd.index(i, j)];
      if (r2e <= 0.0) {
        throw SingularConfiguration("singular configuration: coincident pair at epsilon = 0");
      }
      for (int c = 0; c < d; ++c) {
        const double term = pref * (xi[c] - xj[c]) / r2e;
        b[static_cast<std::size_t>(i) * d + c] += term;
        b[static_cast<std::size_t>(j) * d + c] -= term;  // antisymmetry of pair terms
      }
    }
  }
  return b;
}

}  // namespace

std::vector<double> drift_psi(const Configuration& x, const SystemParams& p) {
  const PairDistances pd = compute_pair_distances(x, p);
  return drift_impl(x, p, pd, 1.0);
}

std::vector<double> drift_phi(const Configuration& x, const SystemParams& p) {
  const PairDistances pd = compute_pair_distances(x, p);
  const double scale = sigmoid(log_psi_eps(pd, p));  // psi/(psi+1)
  return drift_impl(x, p, pd, scale);
}

std::vector<double> drift_majorant(const Configuration& x, const SystemParams& p) {
  const PairDistances pd = compute_pair_distances(x, p);
  const int n = p.n_particles, d = p.d;
  std::vector<double> bound(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double r2 = pd.r2[pd.index(i, j)];
      if (r2 <= 0.0) throw SingularConfiguration("majorant infinite: coincident pair");
      const double inv_r = p.nu / n / std::sqrt(r2);
      bound[static_cast<std::size_t>(i)] += inv_r;
      bound[static_cast<std::size_t>(j)] += inv_r;
    }
  }
  // Domination check against both drifts; a tiny relative slack absorbs
  // rounding in the two evaluation orders.
  const std::vector<double> bphi = drift_impl(x, p, pd, sigmoid(log_psi_eps(pd, p)));
  const std::vector<double> bpsi = drift_impl(x, p, pd, 1.0);
  for (int i = 0; i < n; ++i) {
    double n2phi = 0.0, n2psi = 0.0;
    for (int c = 0; c < d; ++c) {
      const double vphi = bphi[static_cast<std::size_t>(i) * d + c];
      const double vpsi = bpsi[static_cast<std::size_t>(i) * d + c];
      n2phi += vphi * vphi;
      n2psi += vpsi * vpsi;
    }
    const double cap = bound[static_cast<std::size_t>(i)] * (1.0 + 1e-12) + 1e-300;
    if (std::sqrt(n2phi) > cap || std::sqrt(n2psi) > cap) {
      throw std::logic_error("drift_majorant: domination violated");
    }
  }
  return bound;
}

PotentialValue potential_u(const Configuration& x, const SystemParams& p) {
  if (!(p.epsilon > 0.0)) {
    throw std::invalid_argument("potential_u: requires epsilon > 0");
  }
  const PairDistances pd = compute_pair_distances(x, p);
  const int n = p.n_particles;
  double div_sum = 0.0, bound = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const std::size_t k = pd.index(i, j);
      const double r2 = pd.r2[k], r2e = pd.r2eps[k];
      // ordered pairs (i,j) and (j,i) contribute equally: factor 2
      div_sum += 2.0 * (p.d / r2e - 2.0 * r2 / (r2e * r2e));
      bound += 2.0 / r2e;
    }
  }
  PotentialValue out;
  out.divergence = -(p.nu / n) * div_sum;
  out.bound = (p.d * p.nu / n) * bound;
  if (std::abs(out.divergence) > out.bound * (1.0 + 1e-12)) {
    throw std::logic_error("potential_u: divergence bound violated");
  }
  // 1/(psi+1) = sigmoid(-log psi)
  out.u = sigmoid(-log_psi_eps(pd, p)) * out.divergence;
  return out;
}

double radial_statistic(const Configuration& x) {
  x.validate();
  const int n = x.n_particles, d = x.d;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* xi = x.block(i);
    for (int j = i + 1; j < n; ++j) {
      const double* xj = x.block(j);
      double r2 = 0.0;
      for (int c = 0; c < d; ++c) {
        const double dc = xi[c] - xj[c];
        r2 += dc * dc;
      }
      sum += r2;
    }
  }
  // full double sum counts each unordered pair twice
  return 2.0 * sum / (4.0 * n);
}

namespace {

double extreme_pair_distance(const Configuration& x, bool want_min) {
  x.validate();
  const int n = x.n_particles, d = x.d;
  double best = want_min ? std::numeric_limits<double>::infinity() : 0.0;
  for (int i = 0; i < n; ++i) {
    const double* xi = x.block(i);
    for (int j = i + 1; j < n; ++j) {
      const double* xj = x.block(j);
      double r2 = 0.0;
      for (int c = 0; c < d; ++c) {
        const double dc = xi[c] - xj[c];
        r2 += dc * dc;
      }
      best = want_min ? std::min(best, r2) : std::max(best, r2);
    }
  }
  return std::sqrt(best);
}

}  // namespace

double min_pair_distance(const Configuration& x) { return extreme_pair_distance(x, true); }
double max_pair_distance(const Configuration& x) { return extreme_pair_distance(x, false); }

}  // namespace kslab
