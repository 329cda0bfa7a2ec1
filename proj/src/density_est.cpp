#include "kslab/density_est.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kslab/numerics.hpp"

namespace kslab {

namespace {

std::vector<const Configuration*> surviving_samples(const Ensemble& ens) {
  std::vector<const Configuration*> out;
  out.reserve(ens.terminal.size());
  for (int m = 0; m < ens.m_trajectories; ++m) {
    if (!ens.is_stopped(m)) out.push_back(&ens.terminal[static_cast<std::size_t>(m)]);
  }
  return out;
}

std::vector<double> silverman_bandwidth(const std::vector<const Configuration*>& xs,
                                        int dim, int m_total) {
  // per-coordinate sd * (4/(dim+2))^{1/(dim+4)} * M^{-1/(dim+4)}
  std::vector<double> h(static_cast<std::size_t>(dim), 0.0);
  const double n = static_cast<double>(xs.size());
  for (int c = 0; c < dim; ++c) {
    double mean = 0.0;
    for (const Configuration* x : xs) mean += x->coords[static_cast<std::size_t>(c)];
    mean /= n;
    double ss = 0.0;
    for (const Configuration* x : xs) {
      const double d = x->coords[static_cast<std::size_t>(c)] - mean;
      ss += d * d;
    }
    h[static_cast<std::size_t>(c)] = std::sqrt(ss / (n - 1.0));
  }
  const double factor = std::pow(4.0 / (dim + 2), 1.0 / (dim + 4)) *
                        std::pow(static_cast<double>(m_total), -1.0 / (dim + 4));
  for (double& v : h) v *= factor;
  return h;
}

}  // namespace

DensityEstimate estimate_density(const Ensemble& ensemble, double t,
                                 const std::vector<Configuration>& query,
                                 std::optional<double> bandwidth_override,
                                 bool bias_correct) {
  if (ensemble.m_trajectories < 1000) {
    throw std::invalid_argument("estimate_density: requires M >= 1000");
  }
  if (std::abs(ensemble.spec.t_end - t) > 1e-12 * std::max(1.0, t)) {
    throw std::invalid_argument("estimate_density: ensemble horizon does not equal t");
  }
  const int dim = ensemble.params.dim();
  const auto xs = surviving_samples(ensemble);
  if (xs.empty()) throw std::invalid_argument("estimate_density: no surviving samples");

  DensityEstimate est;
  est.query_points = query;
  est.m_total = ensemble.m_trajectories;
  est.m_used = static_cast<int>(xs.size());
  est.bias_corrected = bias_correct;
  if (bandwidth_override) {
    if (!(*bandwidth_override > 0.0)) {
      throw std::invalid_argument("estimate_density: bandwidth must be positive");
    }
    est.bandwidth.assign(static_cast<std::size_t>(dim), *bandwidth_override);
  } else {
    est.bandwidth = silverman_bandwidth(xs, dim, ensemble.m_trajectories);
    for (double h : est.bandwidth) {
      if (!(h > 0.0)) {
        throw std::invalid_argument(
            "estimate_density: degenerate sample spread; pass an explicit bandwidth");
      }
    }
  }

  est.values.assign(query.size(), 0.0);
  est.std_error.assign(query.size(), 0.0);
  const double m_total = static_cast<double>(ensemble.m_trajectories);

  // log normalizers for the base and sqrt(2)-inflated kernels
  double log_norm1 = 0.0;
  for (double h : est.bandwidth) log_norm1 -= std::log(h * std::sqrt(2.0 * M_PI));
  const double log_norm2 = log_norm1 - 0.5 * dim * std::log(2.0);

  parallel_for(0, static_cast<std::int64_t>(query.size()), [&](std::int64_t qi) {
    const Configuration& y = query[static_cast<std::size_t>(qi)];
    if (y.dim() != dim) throw std::invalid_argument("estimate_density: query dim mismatch");
    double sum = 0.0, sum_sq = 0.0;
    for (const Configuration* x : xs) {
      double z2 = 0.0;
      for (int c = 0; c < dim; ++c) {
        const double u = (y.coords[static_cast<std::size_t>(c)] -
                          x->coords[static_cast<std::size_t>(c)]) /
                         est.bandwidth[static_cast<std::size_t>(c)];
        z2 += u * u;
      }
      const double k1 = std::exp(log_norm1 - 0.5 * z2);
      double v = k1;
      if (bias_correct) {
        const double k2 = std::exp(log_norm2 - 0.25 * z2);
        v = 2.0 * k1 - k2;
      }
      sum += v;
      sum_sq += v * v;
    }
    // absorbed trajectories contribute zero kernel mass but stay in the mean
    const double mean = sum / m_total;
    const double mean_sq = sum_sq / m_total;
    est.values[static_cast<std::size_t>(qi)] = std::max(mean, 0.0);
    const double var = std::max(mean_sq - mean * mean, 0.0) / m_total;
    est.std_error[static_cast<std::size_t>(qi)] = std::sqrt(var);
  });
  return est;
}

double gaussian_reference(double t, const Configuration& x, const Configuration& y) {
  if (!(t > 0.0)) throw std::domain_error("gaussian_reference: requires t > 0");
  x.validate();
  y.validate();
  if (x.dim() != y.dim()) throw std::invalid_argument("gaussian_reference: dim mismatch");
  double d2 = 0.0;
  for (std::size_t c = 0; c < x.coords.size(); ++c) {
    const double d = x.coords[c] - y.coords[c];
    d2 += d * d;
  }
  const int dim = x.dim();
  return std::pow(4.0 * M_PI * t, -0.5 * dim) * std::exp(-d2 / (4.0 * t));
}

BoundFit fit_bound(const DensityEstimate& est, double t, const SystemParams& p,
                   BoundKind kind, const Configuration& x,
                   const std::vector<double>& c4_candidates) {
  p.validate();
  if (kind == BoundKind::thm1 && p.d != 2) {
    throw std::invalid_argument("fit_bound: thm1 shape applies to d = 2");
  }
  if ((kind == BoundKind::thm2 || kind == BoundKind::thm3) && p.d < 3) {
    throw std::invalid_argument("fit_bound: thm2/thm3 shapes apply to d >= 3");
  }
  if (kind == BoundKind::thm2 && c4_candidates.empty()) {
    throw std::invalid_argument("fit_bound: empty c4 candidate set");
  }

  // phi_eps per query point, overflow points excluded (the bound holds there
  // trivially).
  std::vector<double> phi(est.query_points.size(), 0.0);
  BoundFit fit;
  fit.kind = kind;
  for (std::size_t i = 0; i < est.query_points.size(); ++i) {
    const PhiValue pv = phi_eps(est.query_points[i], p);
    phi[i] = pv.value;
    if (pv.overflowed) fit.excluded.push_back(static_cast<int>(i));
  }
  auto is_excluded = [&](std::size_t i) {
    return std::find(fit.excluded.begin(), fit.excluded.end(), static_cast<int>(i)) !=
           fit.excluded.end();
  };

  auto sup_for = [&](double c4) {
    double best = -1.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < est.query_points.size(); ++i) {
      if (is_excluded(i)) continue;
      double shape;
      switch (kind) {
        case BoundKind::thm1:
          shape = std::pow(t, -static_cast<double>(p.n_particles)) * phi[i];
          break;
        case BoundKind::thm3:
          shape = std::pow(t, -0.5 * p.dim()) * phi[i];
          break;
        case BoundKind::thm2:
        default: {
          Configuration scaled = est.query_points[i];
          shape = gaussian_reference(c4 * t, x, scaled) * phi[i];
          break;
        }
      }
      const double ratio = est.values[i] / shape;
      if (ratio > best) {
        best = ratio;
        best_i = i;
      }
    }
    return std::pair<double, std::size_t>(best, best_i);
  };

  if (kind == BoundKind::thm2) {
    double best_sup = std::numeric_limits<double>::infinity();
    for (double c4 : c4_candidates) {
      const auto [sup, i] = sup_for(c4);
      if (sup >= 0.0 && sup < best_sup) {
        best_sup = sup;
        fit.fitted_constant = sup;
        fit.fitted_c4 = c4;
        fit.sup_point = est.query_points[i];
      }
    }
  } else {
    const auto [sup, i] = sup_for(0.0);
    if (sup < 0.0) throw std::invalid_argument("fit_bound: all query points excluded");
    fit.fitted_constant = sup;
    fit.sup_point = est.query_points[i];
  }
  return fit;
}

std::vector<double> weighted_kernel(const DensityEstimate& est, const SystemParams& p) {
  std::vector<double> q(est.query_points.size(), 0.0);
  for (std::size_t i = 0; i < est.query_points.size(); ++i) {
    const double log_phi_plus =
        std::log1p(std::exp(std::min(log_psi_eps(est.query_points[i], p), 700.0)));
    // q = p_hat * exp(-log phi); phi saturation drives q to ~0, never to inf
    q[i] = est.values[i] * std::exp(-log_phi_plus);
  }
  return q;
}

double kde_mass_in_box(const Ensemble& ensemble, double lo, double hi,
                       bool bias_correct) {
  if (!(hi > lo)) throw std::invalid_argument("kde_mass_in_box: requires hi > lo");
  const int dim = ensemble.params.dim();
  const auto xs = surviving_samples(ensemble);
  if (xs.empty()) return 0.0;
  const std::vector<double> h = silverman_bandwidth(xs, dim, ensemble.m_trajectories);
  auto box_mass = [&](double scale) {
    double total = 0.0;
    for (const Configuration* x : xs) {
      double prod = 1.0;
      for (int c = 0; c < dim; ++c) {
        const double hc = scale * h[static_cast<std::size_t>(c)];
        const double xc = x->coords[static_cast<std::size_t>(c)];
        const double a = (lo - xc) / (hc * std::sqrt(2.0));
        const double b = (hi - xc) / (hc * std::sqrt(2.0));
        prod *= 0.5 * (std::erf(b) - std::erf(a));
      }
      total += prod;
    }
    return total / static_cast<double>(ensemble.m_trajectories);
  };
  const double m1 = box_mass(1.0);
  if (!bias_correct) return m1;
  return 2.0 * m1 - box_mass(std::sqrt(2.0));
}

std::vector<Configuration> transect_queries(const Configuration& base,
                                            const std::vector<double>& separations) {
  base.validate();
  if (base.n_particles < 2) {
    throw std::invalid_argument("transect_queries: needs at least two particles");
  }
  const int d = base.d;
  std::vector<double> mid(static_cast<std::size_t>(d)), dir(static_cast<std::size_t>(d));
  double norm = 0.0;
  for (int c = 0; c < d; ++c) {
    mid[static_cast<std::size_t>(c)] = 0.5 * (base.block(0)[c] + base.block(1)[c]);
    dir[static_cast<std::size_t>(c)] = base.block(0)[c] - base.block(1)[c];
    norm += dir[static_cast<std::size_t>(c)] * dir[static_cast<std::size_t>(c)];
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    dir.assign(static_cast<std::size_t>(d), 0.0);
    dir[0] = 1.0;
  } else {
    for (double& v : dir) v /= norm;
  }
  std::vector<Configuration> out;
  out.reserve(separations.size());
  for (double s : separations) {
    Configuration y = base;
    for (int c = 0; c < d; ++c) {
      y.block(0)[c] = mid[static_cast<std::size_t>(c)] + 0.5 * s * dir[static_cast<std::size_t>(c)];
      y.block(1)[c] = mid[static_cast<std::size_t>(c)] - 0.5 * s * dir[static_cast<std::size_t>(c)];
    }
    out.push_back(std::move(y));
  }
  return out;
}

std::vector<Configuration> lattice_queries(const Configuration& x, double span,
                                           int points_per_axis, int max_points) {
  x.validate();
  if (points_per_axis < 1) {
    throw std::invalid_argument("lattice_queries: points_per_axis must be >= 1");
  }
  const int dim = x.dim();
  long total = 1;
  for (int c = 0; c < dim; ++c) {
    total *= points_per_axis;
    if (total > max_points) break;
  }
  std::vector<Configuration> out;
  if (total <= max_points) {
    // full tensor lattice
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    for (long k = 0; k < total; ++k) {
      Configuration y = x;
      long rem = k;
      for (int c = 0; c < dim; ++c) {
        const int j = static_cast<int>(rem % points_per_axis);
        rem /= points_per_axis;
        const double frac = points_per_axis == 1
                                ? 0.0
                                : (2.0 * j / (points_per_axis - 1.0) - 1.0);
        y.coords[static_cast<std::size_t>(c)] += span * frac;
      }
      out.push_back(std::move(y));
    }
    return out;
  }
  // deterministic low-discrepancy subset via a Weyl sequence
  out.reserve(static_cast<std::size_t>(max_points));
  for (int k = 0; k < max_points; ++k) {
    Configuration y = x;
    for (int c = 0; c < dim; ++c) {
      const double u = std::fmod(0.5 + (k + 1) * std::pow(0.7548776662466927, c + 1), 1.0);
      y.coords[static_cast<std::size_t>(c)] += span * (2.0 * u - 1.0);
    }
    out.push_back(std::move(y));
  }
  return out;
}

}  // namespace kslab
