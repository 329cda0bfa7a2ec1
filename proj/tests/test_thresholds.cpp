#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "kslab/thresholds.hpp"

using namespace kslab;

TEST_CASE("gamma_fn identities and a frozen high-precision value") {
  CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gamma_fn(0.5) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-14));
  // independent high-precision evaluation of Gamma(1/4)
  CHECK(gamma_fn(0.25) == doctest::Approx(3.6256099082219083).epsilon(1e-12));
  for (double z : {0.125, 0.3, 1.0, 2.5, 7.0, 12.5, 24.0}) {
    CHECK(gamma_fn(z + 1.0) / (z * gamma_fn(z)) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(gamma_fn(0.0), std::domain_error);
  CHECK_THROWS_AS(gamma_fn(-1.5), std::domain_error);
}

TEST_CASE("delta_form_bound closed form at d=2, N=2, alpha=1") {
  SystemParams p;
  p.d = 2;
  p.n_particles = 2;
  p.nu = 1.0;
  // (1/sqrt 2) (1/2) Gamma(1/4)^2/Gamma(3/4)^2, evaluated independently here
  const double coeff = (1.0 / std::sqrt(2.0)) * 0.5 *
                       std::pow(gamma_fn(0.25) / gamma_fn(0.75), 2.0);
  CHECK(delta_form_bound(1.0, p) == doctest::Approx(coeff).epsilon(1e-12));
  CHECK(coeff == doctest::Approx(3.0949).epsilon(1e-4));
  p.nu = 0.37;
  CHECK(delta_form_bound(1.0, p) == doctest::Approx(0.37 * coeff).epsilon(1e-12));
  p.nu = 0.0;
  CHECK(delta_form_bound(1.3, p) == 0.0);
}

TEST_CASE("delta_form_bound rejects alpha = 2 in two dimensions") {
  SystemParams p;
  p.d = 2;
  p.n_particles = 3;
  p.nu = 0.1;
  CHECK_THROWS_AS(delta_form_bound(2.0, p), std::domain_error);
  p.d = 3;
  CHECK_NOTHROW(delta_form_bound(2.0, p));
}

TEST_CASE("threshold/delta duality: delta(alpha, nu = threshold) = 1") {
  for (int d : {2, 3, 4}) {
    for (double n : {2.0, 5.0, 1000.0}) {
      const double hi = d == 2 ? 2.0 - 1e-3 : 2.0;
      for (double alpha = 1.0; alpha <= hi + 1e-12; alpha += 0.1) {
        const double a = std::min(alpha, hi);
        SystemParams p;
        p.d = d;
        p.n_particles = static_cast<int>(n);
        p.nu = nu_threshold_at(a, n, d);
        CHECK(delta_form_bound(a, p) == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("delta at d=3, N=2, alpha=2 is (nu/nu_max)^2 with nu_max = 1") {
  SystemParams p;
  p.d = 3;
  p.n_particles = 2;
  p.nu = 0.6;
  const double nm = nu_max(2, 3).max_value;
  CHECK(nm == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(delta_form_bound(2.0, p) == doctest::Approx(std::pow(0.6 / nm, 2.0)).epsilon(1e-12));
}

TEST_CASE("nu_max closed-form endpoints for d >= 3") {
  // Gamma recurrence: Gamma(5/4) = Gamma(1/4)/4, so 2*2*Gamma(5/4)/Gamma(1/4) = 1
  const ThresholdCurve c3 = nu_max(2, 3);
  CHECK(c3.argmax_alpha == 2.0);
  CHECK(c3.max_value == doctest::Approx(1.0).epsilon(1e-12));
  // Gamma(3/2) = sqrt(pi)/2, so 2*2*Gamma(3/2)/Gamma(1/2) = 2
  const ThresholdCurve c4 = nu_max(2, 4);
  CHECK(c4.max_value == doctest::Approx(2.0).epsilon(1e-12));
  // large-N limits: 2 Gamma(d/4+1/2)/Gamma(d/4-1/2)
  const ThresholdCurve c5 = nu_max(1e6, 5);
  CHECK(c5.max_value ==
        doctest::Approx(2.0 * gamma_fn(1.75) / gamma_fn(0.75)).epsilon(1e-5));
}

TEST_CASE("d=2 curve: two-times-smaller ratio, decay at alpha -> 2, monotone in N") {
  const ThresholdCurve big = nu_max(1e9, 2);
  const ThresholdCurve small = nu_max(1e3, 2);
  const double ratio = big.max_value / small.max_value;
  CHECK(ratio > 0.35);
  CHECK(ratio < 0.65);
  // the threshold collapses at the Gamma pole alpha -> 2 (value ~ (2-alpha)/2)
  CHECK(small.values.back() < 0.02 * small.max_value);
  CHECK(nu_threshold_at(2.0 - 1e-6, 1e3, 2) < 1e-4 * small.max_value);
  // maxima decrease with N
  double prev = 1e300;
  for (double n : {10.0, 1e3, 1e6, 1e9}) {
    const double v = nu_max(n, 2).max_value;
    CHECK(v < prev);
    prev = v;
  }
  // curve points live where the refined maximizer does
  CHECK(small.argmax_alpha > 1.0);
  CHECK(small.argmax_alpha < 2.0);
  CHECK(small.max_value >= *std::max_element(small.values.begin(), small.values.end()) - 1e-9);
}

TEST_CASE("nu_max validates input") {
  CHECK_THROWS_AS(nu_max(1, 2), std::domain_error);
  CHECK_THROWS_AS(nu_max(2, 1), std::domain_error);
  CHECK_THROWS_AS(nu_max(2, 2, 0.5), std::invalid_argument);  // grid too coarse
}

TEST_CASE("nu_max_theorem2") {
  CHECK(nu_max_theorem2(3) == doctest::Approx(std::sqrt(2.0)));
  CHECK(nu_max_theorem2(4) == 4.0);
  CHECK(nu_max_theorem2(10) == 16.0);
  CHECK_THROWS_AS(nu_max_theorem2(2), std::domain_error);
}

TEST_CASE("kappa_max_lemma and the nu renormalization") {
  CHECK(kappa_max_lemma(2, 3) == doctest::Approx(36.0).epsilon(1e-12));            // l = 1.5
  CHECK(kappa_max_lemma(2, 4) == doctest::Approx(16.0 * 64.0 / 36.0).epsilon(1e-12));
  // l -> 1: the d >= 4 threshold tends to 16
  CHECK(kappa_max_lemma(100000, 6) == doctest::Approx(16.0).epsilon(1e-4));
  CHECK(nu_from_kappa(36.0, 3) == doctest::Approx(3.0));
  CHECK(kappa_from_nu(3.0, 3) == doctest::Approx(36.0));
  CHECK(nu_from_kappa(kappa_from_nu(0.77, 5), 5) == doctest::Approx(0.77).epsilon(1e-14));
}

TEST_CASE("operator_norm_chain") {
  const OperatorNormChain a = operator_norm_chain(1.0, 0.25);
  CHECK(a.norm_r == doctest::Approx(0.5));
  CHECK(a.norm_q == doctest::Approx(0.5));
  CHECK(a.norm_t == doctest::Approx(0.25));
  const OperatorNormChain b = operator_norm_chain(2.0, 0.81);
  CHECK(b.norm_r == doctest::Approx(0.9));
  CHECK(b.norm_q == doctest::Approx(1.0));  // exponent (2-a)/(2a) = 0
  CHECK(b.norm_t == doctest::Approx(0.9));
  const OperatorNormChain z = operator_norm_chain(1.0, 0.0);
  CHECK(z.norm_r == 0.0);
  CHECK(z.norm_q == 0.0);
  CHECK(z.norm_t == 0.0);
  CHECK_THROWS_AS(operator_norm_chain(1.5, 1.0), std::domain_error);
  CHECK_THROWS_AS(operator_norm_chain(1.5, -0.1), std::domain_error);
}

TEST_CASE("bessel_dimension and the blow-up predicate") {
  CHECK(bessel_dimension(2, 4.0) == 0.0);
  CHECK(bessel_dimension(2, 0.0) == 2.0);
  CHECK(bessel_dimension(5, 2.0) == 4.0);
  for (int n : {2, 3, 10, 1000}) {
    CHECK(blows_up(n, 4.0));
    CHECK(blows_up(n, 5.5));
    CHECK_FALSE(blows_up(n, 3.999));
  }
}

TEST_CASE("extrapolation_constant") {
  const auto a = extrapolation_constant(1.0, 2.0, std::nullopt, 1.0, 1.0, 1.0);
  CHECK(a.beta == doctest::Approx(0.5));
  CHECK(a.m == doctest::Approx(16.0));
  const auto b = extrapolation_constant(1.0, 2.0, 4.0, 1.0, 1.0, 1.0);
  CHECK(b.beta == doctest::Approx(2.0 / 3.0));
  CHECK(b.m == doctest::Approx(512.0).epsilon(1e-12));
  const auto c = extrapolation_constant(1.0, 2.0, std::nullopt, 1.0, 2.0, 1.0);
  CHECK(c.m == doctest::Approx(2.0 * a.m));  // linear in M1
  CHECK_THROWS_AS(extrapolation_constant(2.0, 2.0, std::nullopt, 1.0, 1.0, 1.0),
                  std::domain_error);
  CHECK_THROWS_AS(extrapolation_constant(1.0, 3.0, 2.0, 1.0, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(extrapolation_constant(1.0, 2.0, 4.0, -1.0, 1.0, 1.0), std::domain_error);
}
