#include "kslab/thresholds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "kslab/numerics.hpp"

namespace kslab {

double gamma_fn(double z) {
  if (!(z > 0.0)) throw std::domain_error("gamma_fn: requires z > 0");
  return std::tgamma(z);
}

namespace {

double log_gamma_pos(double z) { return std::log(gamma_fn(z)); }

void check_alpha_range(double alpha, int d) {
  if (d == 2) {
    if (!(alpha >= 1.0 && alpha < 2.0)) {
      throw std::domain_error(
          "no two-dimensional Hardy inequality: alpha must lie in [1,2) when d = 2");
    }
  } else {
    if (!(alpha >= 1.0 && alpha <= 2.0)) {
      throw std::domain_error("alpha must lie in [1,2] when d >= 3");
    }
  }
}

// log of [N^{3a/2-1}/(N-1)^{1+a/2} 2^a G(d/4+a/4)^2/G(d/4-a/4)^2]
double log_threshold_pow_alpha(double alpha, double n, int d) {
  return (1.5 * alpha - 1.0) * std::log(n) - (1.0 + 0.5 * alpha) * std::log(n - 1.0) +
         alpha * std::log(2.0) + 2.0 * log_gamma_pos(0.25 * d + 0.25 * alpha) -
         2.0 * log_gamma_pos(0.25 * d - 0.25 * alpha);
}

}  // namespace

double nu_threshold_at(double alpha, double n_particles, int d) {
  if (d < 2) throw std::domain_error("nu_threshold_at: d must be >= 2");
  if (!(n_particles >= 2.0)) throw std::domain_error("nu_threshold_at: N must be >= 2");
  check_alpha_range(alpha, d);
  return std::exp(log_threshold_pow_alpha(alpha, n_particles, d) / alpha);
}

double delta_form_bound(double alpha, const SystemParams& p) {
  p.validate();
  check_alpha_range(alpha, p.d);
  if (p.nu == 0.0) return 0.0;
  // delta = (nu / threshold(alpha))^alpha, evaluated in logs
  const double log_delta = alpha * std::log(p.nu) -
                           log_threshold_pow_alpha(alpha, p.n_particles, p.d);
  return std::exp(log_delta);
}

ThresholdCurve nu_max(double n_particles, int d, double alpha_step) {
  if (d < 2) throw std::domain_error("nu_max: d must be >= 2");
  if (!(n_particles >= 2.0)) throw std::domain_error("nu_max: N must be >= 2");
  if (!(alpha_step > 0.0 && alpha_step <= 1e-3)) {
    throw std::invalid_argument("nu_max: alpha grid step must be in (0, 1e-3]");
  }
  ThresholdCurve curve;
  const double alpha_hi = d == 2 ? 2.0 - alpha_step : 2.0;
  const int steps = static_cast<int>(std::ceil((alpha_hi - 1.0) / alpha_step));
  curve.alphas.reserve(steps + 1);
  curve.values.reserve(steps + 1);
  std::size_t grid_argmax = 0;
  for (int k = 0; k <= steps; ++k) {
    const double a = std::min(1.0 + k * alpha_step, alpha_hi);
    curve.alphas.push_back(a);
    curve.values.push_back(nu_threshold_at(a, n_particles, d));
    if (curve.values.back() > curve.values[grid_argmax]) grid_argmax = curve.alphas.size() - 1;
  }
  if (d >= 3) {
    // Operative threshold: the alpha = 2 endpoint (usual Hardy inequality),
    // 2 (N/(N-1)) Gamma(d/4+1/2)/Gamma(d/4-1/2).
    curve.argmax_alpha = 2.0;
    curve.max_value = 2.0 * n_particles / (n_particles - 1.0) *
                      gamma_fn(0.25 * d + 0.5) / gamma_fn(0.25 * d - 0.5);
    return curve;
  }
  // d = 2: golden-section refinement around the grid argmax.
  const double lo = grid_argmax == 0 ? 1.0 : curve.alphas[grid_argmax - 1];
  const double hi = grid_argmax + 1 < curve.alphas.size() ? curve.alphas[grid_argmax + 1]
                                                          : alpha_hi;
  curve.argmax_alpha = golden_section_max(
      [&](double a) { return nu_threshold_at(a, n_particles, d); }, lo, hi, 1e-9);
  curve.max_value = nu_threshold_at(curve.argmax_alpha, n_particles, d);
  return curve;
}

double nu_max_theorem2(int d) {
  if (d < 3) throw std::domain_error("nu_max_theorem2: requires d >= 3");
  return d == 3 ? std::sqrt(2.0) : 2.0 * (d - 2);
}

double kappa_max_lemma(int n_particles, int d) {
  if (d < 3) throw std::domain_error("kappa_max_lemma: requires d >= 3");
  if (n_particles < 2) throw std::domain_error("kappa_max_lemma: requires N >= 2");
  const double dn = static_cast<double>(d) * n_particles;
  const double l = dn / (dn - 2.0);
  if (d == 3) return 8.0 * l * l * n_particles / (n_particles - 1.0);
  return 16.0 * l * l;
}

double nu_from_kappa(double kappa, int d) {
  if (d < 3) throw std::domain_error("nu_from_kappa: requires d >= 3");
  if (!(kappa >= 0.0)) throw std::domain_error("nu_from_kappa: kappa < 0");
  return std::sqrt(kappa) * (d - 2) / 2.0;
}

double kappa_from_nu(double nu, int d) {
  if (d < 3) throw std::domain_error("kappa_from_nu: requires d >= 3");
  const double s = 2.0 * nu / (d - 2);
  return s * s;
}

OperatorNormChain operator_norm_chain(double alpha, double delta) {
  if (!(alpha >= 1.0 && alpha <= 2.0)) {
    throw std::domain_error("operator_norm_chain: alpha must lie in [1,2]");
  }
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw std::domain_error("Neumann series diverges: requires 0 <= delta < 1");
  }
  OperatorNormChain out;
  out.norm_r = std::sqrt(delta);
  out.norm_q = std::pow(delta, (2.0 - alpha) / (2.0 * alpha));
  out.norm_t = std::pow(delta, 1.0 / alpha);
  if (!(out.norm_t < 1.0)) throw std::logic_error("operator_norm_chain: ||T|| >= 1");
  return out;
}

double bessel_dimension(int n_particles, double nu) {
  if (n_particles < 2) throw std::domain_error("bessel_dimension: requires N >= 2");
  return (n_particles - 1) * (2.0 - 0.5 * nu);
}

bool blows_up(int n_particles, double nu) {
  return bessel_dimension(n_particles, nu) <= 0.0;
}

ExtrapolationConstant extrapolation_constant(double p, double q, std::optional<double> r,
                                             double nu_exp, double m1, double m2) {
  const double r_eff = r.value_or(std::numeric_limits<double>::infinity());
  if (!(1.0 <= p && p < q && (!r || q < *r))) {
    throw std::domain_error("extrapolation_constant: requires 1 <= p < q < r <= inf");
  }
  if (!(nu_exp > 0.0) || !(m1 > 0.0) || !(m2 > 0.0)) {
    throw std::domain_error("extrapolation_constant: requires nu, M1, M2 > 0");
  }
  ExtrapolationConstant out;
  out.beta = r ? (r_eff / q) * (q - p) / (r_eff - p) : (q - p) / q;
  const double inv = 1.0 / (1.0 - out.beta);
  out.m = std::pow(2.0, nu_exp * inv * inv) * m1 * std::pow(m2, inv);
  return out;
}

}  // namespace kslab
