#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kslab/bessel_oracle.hpp"
#include "kslab/numerics.hpp"

using namespace kslab;

TEST_CASE("bessel_i at z = 0 and half-integer closed forms") {
  CHECK(bessel_i(0.0, 0.0) == 1.0);
  CHECK(bessel_i(0.5, 0.0) == 0.0);
  CHECK(bessel_i(2.0, 0.0) == 0.0);
  // I_{1/2}(z) = sqrt(2/(pi z)) sinh z
  for (double z : {0.1, 1.0, 7.5, 25.0, 40.0}) {
    const double closed = std::sqrt(2.0 / (M_PI * z)) * std::sinh(z);
    CHECK(bessel_i(0.5, z) == doctest::Approx(closed).epsilon(1e-10));
  }
  CHECK(bessel_i(0.5, 1.0) == doctest::Approx(0.937674).epsilon(1e-6));
  // I_{-1/2}(z) = sqrt(2/(pi z)) cosh z
  for (double z : {0.5, 3.0, 33.0}) {
    const double closed = std::sqrt(2.0 / (M_PI * z)) * std::cosh(z);
    CHECK(bessel_i(-0.5, z) == doctest::Approx(closed).epsilon(1e-10));
  }
  CHECK_THROWS_AS(bessel_i(-1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(bessel_i(0.5, -1.0), std::domain_error);
}

TEST_CASE("bessel_i recurrence I_{v-1} - I_{v+1} = (2v/z) I_v") {
  for (double v : {0.5, 1.0, 1.7, 2.5}) {
    for (double z : {0.1, 1.0, 5.0, 18.0, 29.5, 31.0, 45.0, 80.0}) {
      const double lhs = bessel_i(v - 1.0, z) - bessel_i(v + 1.0, z);
      const double rhs = 2.0 * v / z * bessel_i(v, z);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
  }
}

TEST_CASE("bessel_i series/asymptotic seam is continuous") {
  for (double v : {0.0, 0.3, 1.5}) {
    const double below = bessel_i_scaled(v, 30.0 - 1e-9);
    const double above = bessel_i_scaled(v, 30.0 + 1e-9);
    CHECK(below == doctest::Approx(above).epsilon(1e-8));
  }
}

TEST_CASE("bessel_i_scaled stays finite where the raw function overflows") {
  CHECK(std::isfinite(bessel_i_scaled(0.5, 1500.0)));
  CHECK(bessel_i_scaled(0.5, 1500.0) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * M_PI * 1500.0)).epsilon(1e-3));
}

TEST_CASE("bessel_heat_kernel: x0 = 0 branch value and Rayleigh reduction") {
  CHECK(bessel_heat_kernel({2.0, 1.0, 0.0, 1.0}) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  // delta = 2: p(t,0,y) = (y/t) exp(-y^2/(2t))
  for (double y : {0.3, 1.0, 2.5}) {
    const double t = 0.7;
    CHECK(bessel_heat_kernel({2.0, t, 0.0, y}) ==
          doctest::Approx(y / t * std::exp(-y * y / (2.0 * t))).epsilon(1e-12));
  }
  CHECK_THROWS_AS(bessel_heat_kernel({0.0, 1.0, 0.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS(bessel_heat_kernel({-0.5, 1.0, 0.0, 1.0}), std::domain_error);
}

TEST_CASE("bessel_heat_kernel normalizes to 1 for delta >= 2") {
  for (double delta : {2.0, 2.5, 3.0}) {
    for (double t : {0.5, 1.0}) {
      for (double x0 : {0.0, 1.3}) {
        const double upper = x0 + 30.0 * std::sqrt(t) + 5.0;
        const double mass = adaptive_simpson(
            [&](double y) { return bessel_heat_kernel({delta, t, x0, y}); }, 0.0, upper,
            1e-10, 48, /*min_depth=*/8);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("bessel_heat_kernel is continuous in x0 at 0") {
  const double from_limit = bessel_heat_kernel({3.0, 1.0, 1e-8, 1.0});
  const double at_zero = bessel_heat_kernel({3.0, 1.0, 0.0, 1.0});
  CHECK(from_limit == doctest::Approx(at_zero).epsilon(1e-6));
}

TEST_CASE("Chapman-Kolmogorov spot check") {
  const double s = 0.5, t = 0.5, y = 1.0;
  const double conv = adaptive_simpson(
      [&](double z) {
        return bessel_heat_kernel({2.0, s, 0.0, z}) * bessel_heat_kernel({2.0, t, z, y});
      },
      0.0, 14.0, 1e-10, 48, /*min_depth=*/6);
  CHECK(conv == doctest::Approx(bessel_heat_kernel({2.0, s + t, 0.0, y})).epsilon(1e-6));
}

TEST_CASE("bessel_kernel_cdf endpoints") {
  CHECK(bessel_kernel_cdf(2.0, 1.0, 0.0, 0.0) == 0.0);
  CHECK(bessel_kernel_cdf(2.0, 1.0, 0.0, 25.0) == doctest::Approx(1.0).epsilon(1e-8));
  // delta = 2, x0 = 0: F(y) = 1 - exp(-y^2/(2t))
  CHECK(bessel_kernel_cdf(2.0, 1.0, 0.0, 1.0) ==
        doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-8));
}

TEST_CASE("squared_bessel_mean") {
  CHECK(squared_bessel_mean(0.0, 0.7, 3.0) == 0.7);
  CHECK(squared_bessel_mean(5.0, 0.7, 0.0) == 0.7);  // critical nu = 4
  CHECK(squared_bessel_mean(0.5, 0.25, 2.0) == doctest::Approx(1.25));
}

namespace {

Ensemble brownian_pair_ensemble(double nu, double eps, double dt, double t_end, int m,
                                DriftKind kind, int record_every = 0) {
  SystemParams p;
  p.d = 2;
  p.n_particles = 2;
  p.nu = nu;
  p.epsilon = eps;
  Configuration x = Configuration::zeros(2, 2);
  x.block(0)[0] = 0.5;
  x.block(1)[0] = -0.5;
  SimSpec s;
  s.dt = dt;
  s.t_end = t_end;
  s.drift_kind = kind;
  s.seed = 321;
  s.initial = InitialCondition::at(x);
  s.record_every = record_every;
  return simulate_ensemble(p, s, m);
}

}  // namespace

TEST_CASE("validate_radial: Brownian pipeline smoke test (delta = 2)") {
  SystemParams p;
  p.d = 2;
  p.n_particles = 2;
  p.nu = 0.0;
  p.epsilon = 0.0;
  const Ensemble ens = brownian_pair_ensemble(0.0, 0.0, 1e-4, 0.25, 2000, DriftKind::psi);
  const RadialValidation v = validate_radial(ens, p);
  CHECK(v.delta == 2.0);
  CHECK(v.mean_gap_stderr < 4.0);
  REQUIRE(v.ks_distance.has_value());
  CHECK(*v.ks_distance < 0.05);
  CHECK(v.expected_mean == doctest::Approx(0.25 + 2.0 * 0.25));
}

TEST_CASE("validate_radial rejects the phi drift and coarse steps") {
  SystemParams p;
  p.d = 2;
  p.n_particles = 2;
  p.nu = 0.0;
  p.epsilon = 0.0;
  const Ensemble phi_ens =
      brownian_pair_ensemble(0.0, 0.0, 1e-4, 0.05, 1000, DriftKind::phi);
  CHECK_THROWS_AS(validate_radial(phi_ens, p), std::invalid_argument);
  const Ensemble coarse = brownian_pair_ensemble(0.0, 0.0, 1e-2, 0.05, 1000, DriftKind::psi);
  CHECK_THROWS_AS(validate_radial(coarse, p), std::invalid_argument);
  p.epsilon = 1e-2;
  const Ensemble ok = brownian_pair_ensemble(0.0, 1e-2, 1e-4, 0.05, 1000, DriftKind::psi);
  CHECK_THROWS_AS(validate_radial(ok, p), std::invalid_argument);  // eps too large
}

TEST_CASE("validate_radial in the absorbed regime checks the pre-collapse mean") {
  SystemParams p;
  p.d = 2;
  p.n_particles = 2;
  p.nu = 5.0;  // delta = -0.5
  p.epsilon = 1e-4;
  const Ensemble ens =
      brownian_pair_ensemble(5.0, 1e-4, 1e-4, 0.2, 400, DriftKind::psi, 100);
  const RadialValidation v = validate_radial(ens, p);
  CHECK_FALSE(v.ks_distance.has_value());
  CHECK(v.delta == doctest::Approx(-0.5));
  CHECK(v.comparison_time <= 0.2);
  CHECK(v.mean_gap_stderr < 6.0);
  // without records the absorbed regime cannot be validated
  const Ensemble bare = brownian_pair_ensemble(5.0, 1e-4, 1e-4, 0.2, 400, DriftKind::psi);
  CHECK_THROWS_AS(validate_radial(bare, p), std::invalid_argument);
}

TEST_CASE("validate_radial refuses stopped ensembles") {
  SystemParams p;
  p.d = 2;
  p.n_particles = 2;
  p.nu = 0.0;
  p.epsilon = 0.0;
  SimSpec s;
  s.dt = 1e-4;
  s.t_end = 0.02;
  s.drift_kind = DriftKind::psi;
  s.seed = 1;
  Configuration x = Configuration::zeros(2, 2);
  x.block(0)[0] = 0.5;
  x.block(1)[0] = -0.5;
  s.initial = InitialCondition::at(x);
  const Ensemble stopped = simulate_stopped(p, s, 5.0, 1200);
  CHECK_THROWS_AS(validate_radial(stopped, p), std::invalid_argument);
}
