#pragma once

#include <optional>
#include <vector>

#include "kslab/core_model.hpp"

// Closed-form admissibility thresholds for the attraction strength, the
// alpha-form-bound delta, the resolvent operator-norm chain, the squared-Bessel
// dimension of the radial statistic, the weighted Sobolev kappa threshold and
// the extrapolation constant.  Everything here is Gamma functions and
// elementary algebra; huge particle counts are handled in the log domain.

namespace kslab {

// Gamma(z), z > 0.
double gamma_fn(double z);

// alpha-form-bound of the regularized drift (uniform in epsilon):
//   delta = nu^alpha (N-1)^{1+a/2} / N^{3a/2-1} * 2^{-a} * G(d/4-a/4)^2/G(d/4+a/4)^2.
// Valid for 1 <= alpha < 2 when d = 2 (the Gamma ratio has a pole at alpha = 2)
// and 1 <= alpha <= 2 when d >= 3.
double delta_form_bound(double alpha, const SystemParams& p);

// The nu-threshold curve alpha -> [N^{3a/2-1}/(N-1)^{1+a/2} 2^a G(d/4+a/4)^2/G(d/4-a/4)^2]^{1/a}.
struct ThresholdCurve {
  std::vector<double> alphas;
  std::vector<double> values;
  double argmax_alpha = 0.0;
  double max_value = 0.0;
};

// Evaluates the curve on a grid of step <= alpha_step and locates the operative
// maximum.  For d = 2 the maximizer is found by grid search plus golden-section
// refinement; for d >= 3 the operative threshold is the alpha = 2 endpoint
//   2 (N/(N-1)) Gamma(d/4+1/2)/Gamma(d/4-1/2)
// (the usual Hardy inequality), which is what argmax_alpha / max_value report.
ThresholdCurve nu_max(double n_particles, int d, double alpha_step = 1e-3);

// Threshold value at a single alpha (log-domain evaluation, safe for N ~ 1e9).
double nu_threshold_at(double alpha, double n_particles, int d);

// sqrt(2) for d = 3, 2(d-2) for d >= 4.
double nu_max_theorem2(int d);

// kappa threshold of the weighted Sobolev embedding, with l = dN/(dN-2):
// 8 l^2 N/(N-1) for d = 3, 16 l^2 for d >= 4.  nu and kappa are related by
// nu = sqrt(kappa) (d-2)/2.
double kappa_max_lemma(int n_particles, int d);
double nu_from_kappa(double kappa, int d);
double kappa_from_nu(double nu, int d);

// Operator norms of the resolvent factors: (sqrt(delta), delta^{(2-a)/(2a)},
// delta^{1/a}).  Requires delta < 1 (Neumann series).
struct OperatorNormChain {
  double norm_r = 0.0;
  double norm_q = 0.0;
  double norm_t = 0.0;
};
OperatorNormChain operator_norm_chain(double alpha, double delta);

// (N-1)(2 - nu/2): dimension of the squared-Bessel radial process; the system
// blows up (all particles glue) iff this is <= 0, i.e. nu >= 4.
double bessel_dimension(int n_particles, double nu);
bool blows_up(int n_particles, double nu);

// Extrapolation constant M = 2^{nu/(1-beta)^2} M1 M2^{1/(1-beta)} with
// beta = (r/q)(q-p)/(r-p); r = infinity (nullopt) gives beta = (q-p)/q.
struct ExtrapolationConstant {
  double beta = 0.0;
  double m = 0.0;
};
ExtrapolationConstant extrapolation_constant(double p, double q, std::optional<double> r,
                                             double nu_exp, double m1, double m2);

}  // namespace kslab
