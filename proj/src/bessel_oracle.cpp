#include "kslab/bessel_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kslab/numerics.hpp"
#include "kslab/thresholds.hpp"

namespace kslab {

namespace {

constexpr double kSeriesAsymptoticSwitch = 30.0;
constexpr int kSeriesTerms = 40;
constexpr int kAsymptoticTerms = 10;

// Power series sum_k (z/2)^{order+2k} / (k! Gamma(order+k+1)); all terms are
// positive so there is no cancellation.  Leading factor through lgamma to keep
// small orders near z = 0 exact.
double series_i(double order, double z) {
  const double half = 0.5 * z;
  const double log_lead = order * std::log(half) - std::lgamma(order + 1.0);
  double term = std::exp(log_lead);
  double sum = term;
  for (int k = 1; k <= kSeriesTerms; ++k) {
    term *= half * half / (k * (order + k));
    sum += term;
  }
  return sum;
}

// e^{-z} I_order(z) ~ 1/sqrt(2 pi z) * sum_k (-1)^k a_k(order)/z^k,
// a_k = prod_{j=1..k} (4 order^2 - (2j-1)^2) / (k! 8^k).
double asymptotic_i_scaled(double order, double z) {
  const double mu = 4.0 * order * order;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= kAsymptoticTerms; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (8.0 * z * k);
    sum += term;
  }
  return sum / std::sqrt(2.0 * M_PI * z);
}

}  // namespace

double bessel_i(double order, double z) {
  if (!(order > -1.0)) throw std::domain_error("bessel_i: requires order > -1");
  if (!(z >= 0.0)) throw std::domain_error("bessel_i: requires z >= 0");
  if (z == 0.0) {
    if (order == 0.0) return 1.0;
    return order > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  if (z <= kSeriesAsymptoticSwitch) return series_i(order, z);
  return asymptotic_i_scaled(order, z) * std::exp(z);
}

double bessel_i_scaled(double order, double z) {
  if (!(order > -1.0)) throw std::domain_error("bessel_i: requires order > -1");
  if (!(z >= 0.0)) throw std::domain_error("bessel_i: requires z >= 0");
  if (z == 0.0) {
    if (order == 0.0) return 1.0;
    return order > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  if (z <= kSeriesAsymptoticSwitch) return series_i(order, z) * std::exp(-z);
  return asymptotic_i_scaled(order, z);
}

double bessel_heat_kernel(const BesselKernelParams& params) {
  const double delta = params.delta, t = params.t, x = params.x0, y = params.y;
  if (!(delta > 0.0)) {
    throw std::domain_error("absorbed regime, kernel formula not applicable (delta <= 0)");
  }
  if (!(t > 0.0)) throw std::domain_error("bessel_heat_kernel: requires t > 0");
  if (!(x >= 0.0 && y >= 0.0)) {
    throw std::domain_error("bessel_heat_kernel: requires x0, y >= 0");
  }
  const double order = 0.5 * delta - 1.0;
  if (y == 0.0) {
    // continuous limit of either branch
    if (delta > 1.0) return 0.0;
    if (delta == 1.0) return std::sqrt(2.0 / (M_PI * t)) * std::exp(-x * x / (2.0 * t));
    return std::numeric_limits<double>::infinity();
  }
  if (x == 0.0) {
    const double log_p = (1.0 - 0.5 * delta) * std::log(2.0) - std::lgamma(0.5 * delta) -
                         0.5 * delta * std::log(t) + (delta - 1.0) * std::log(y) -
                         y * y / (2.0 * t);
    return std::exp(log_p);
  }
  // (y/t)(y/x)^{order} e^{-(x-y)^2/(2t)} * [e^{-xy/t} I_order(xy/t)]
  const double log_pref = std::log(y / t) + order * std::log(y / x) -
                          (x - y) * (x - y) / (2.0 * t);
  return std::exp(log_pref) * bessel_i_scaled(order, x * y / t);
}

double bessel_kernel_cdf(double delta, double t, double x0, double y, double tol) {
  if (!(y >= 0.0)) throw std::domain_error("bessel_kernel_cdf: requires y >= 0");
  if (y == 0.0) return 0.0;
  // force enough initial panels that the O(sqrt t)-wide bump cannot slip
  // between coarse Simpson nodes on a wide interval
  const double width = y / std::max(std::sqrt(t), 1e-6);
  const int min_depth = std::min(10, static_cast<int>(std::ceil(std::log2(width + 2.0))) + 2);
  return adaptive_simpson(
      [&](double u) { return bessel_heat_kernel({delta, t, x0, u}); }, 0.0, y, tol, 48,
      min_depth);
}

double squared_bessel_mean(double t, double r0, double delta) {
  if (!(t >= 0.0)) throw std::domain_error("squared_bessel_mean: requires t >= 0");
  return r0 + delta * t;
}

namespace {

// Kolmogorov-Smirnov distance of a sample against the kernel CDF, integrating
// the density cumulatively over the sorted sample.
double ks_against_kernel(std::vector<double> sample, double delta, double t, double x0) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double ks = 0.0, cdf = 0.0, prev = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double y = sample[i];
    if (y > prev) {
      cdf += adaptive_simpson(
          [&](double u) { return bessel_heat_kernel({delta, t, x0, u}); }, prev, y, 1e-10);
      prev = y;
    }
    ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / n));
    ks = std::max(ks, std::abs(cdf - static_cast<double>(i + 1) / n));
  }
  return ks;
}

}  // namespace

RadialValidation validate_radial(const Ensemble& ensemble, const SystemParams& p) {
  p.validate();
  if (ensemble.spec.drift_kind != DriftKind::psi) {
    throw std::invalid_argument(
        "validate_radial: the squared-Bessel reduction holds for the psi drift only");
  }
  if (ensemble.spec.initial.kind != InitialCondition::Kind::point) {
    throw std::invalid_argument("validate_radial: requires a point initial condition");
  }
  if (ensemble.barrier_r) {
    throw std::invalid_argument(
        "validate_radial: the radial reduction concerns the unstopped system");
  }
  if (!(p.epsilon <= 1e-4)) {
    throw std::invalid_argument("validate_radial: requires epsilon <= 1e-4");
  }
  if (!(ensemble.spec.dt <= 1e-4)) {
    throw std::invalid_argument("validate_radial: requires dt <= 1e-4");
  }
  const double r0 = radial_statistic(ensemble.spec.initial.point);
  const double delta = bessel_dimension(p.n_particles, p.nu);

  RadialValidation out;
  out.delta = delta;
  out.sample_count = ensemble.m_trajectories;

  if (delta > 0.0) {
    std::vector<double> r_terminal;
    r_terminal.reserve(ensemble.terminal.size());
    for (const Configuration& x : ensemble.terminal) {
      r_terminal.push_back(radial_statistic(x));
    }
    const SampleStats st = sample_stats(r_terminal);
    out.comparison_time = ensemble.spec.t_end;
    out.mean_r = st.mean;
    out.expected_mean = squared_bessel_mean(ensemble.spec.t_end, r0, delta);
    out.std_error = st.std_error;
    out.mean_gap_stderr = std::abs(st.mean - out.expected_mean) / st.std_error;

    std::vector<double> roots;
    roots.reserve(r_terminal.size());
    for (double r : r_terminal) roots.push_back(std::sqrt(std::max(r, 0.0)));
    out.ks_distance =
        ks_against_kernel(std::move(roots), delta, ensemble.spec.t_end, std::sqrt(r0));
    return out;
  }

  // Absorbed regime: the mean identity only holds while R stays positive, so
  // evaluate it at the latest recorded time before any trajectory's radial
  // statistic has effectively collapsed.
  if (ensemble.records.empty()) {
    throw std::invalid_argument(
        "validate_radial: delta <= 0 requires recorded trajectories (record_every > 0)");
  }
  const double floor = 1e-3 * r0;
  double tau = ensemble.spec.t_end;
  for (const TrajectoryRecord& rec : ensemble.records) {
    for (std::size_t k = 0; k < rec.times.size(); ++k) {
      if (rec.r_path[k] <= floor) {
        tau = std::min(tau, rec.times[k]);
        break;
      }
    }
  }
  // largest recorded time <= tau, from the common sample grid
  const std::vector<double>& times = ensemble.records.front().times;
  std::size_t idx = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] <= tau) idx = k;
  }
  std::vector<double> r_at_tau;
  r_at_tau.reserve(ensemble.records.size());
  for (const TrajectoryRecord& rec : ensemble.records) {
    r_at_tau.push_back(rec.r_path[idx]);
  }
  const SampleStats st = sample_stats(r_at_tau);
  out.comparison_time = times[idx];
  out.mean_r = st.mean;
  out.expected_mean = squared_bessel_mean(times[idx], r0, delta);
  out.std_error = st.std_error;
  out.mean_gap_stderr = st.std_error > 0.0
                            ? std::abs(st.mean - out.expected_mean) / st.std_error
                            : 0.0;
  out.ks_distance = std::nullopt;
  return out;
}

}  // namespace kslab
