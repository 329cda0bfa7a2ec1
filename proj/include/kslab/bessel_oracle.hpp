#pragma once

#include <optional>

#include "kslab/sde_sim.hpp"

// Exact radial ground truth: modified Bessel functions of the first kind, the
// explicit Bessel-process heat kernel, the squared-Bessel mean identity and the
// distributional validation of simulated ensembles through the radial
// statistic R_t.

namespace kslab {

// I_order(z), order > -1, z >= 0.  Power series for z <= 30 (40 terms),
// uniform asymptotic expansion beyond (10 terms).
double bessel_i(double order, double z);

// e^{-z} I_order(z); stable for large z.
double bessel_i_scaled(double order, double z);

struct BesselKernelParams {
  double delta;  // process dimension, > 0
  double t;      // > 0
  double x0;     // >= 0 start
  double y;      // >= 0 target
};

// Transition density of the Bessel process of dimension delta:
//   x,y > 0 : (y/t) (y/x)^{delta/2-1} exp(-(x^2+y^2)/(2t)) I_{delta/2-1}(xy/t)
//   x  = 0 : 2^{1-delta/2}/Gamma(delta/2) t^{-delta/2} y^{delta-1} exp(-y^2/(2t))
// Evaluated through the scaled Bessel function, so large xy/t cannot overflow.
// Throws std::domain_error for delta <= 0 (absorbed regime).
double bessel_heat_kernel(const BesselKernelParams& params);

// CDF  F(y) = int_0^y kernel dy', integrated by adaptive Simpson.
double bessel_kernel_cdf(double delta, double t, double x0, double y, double tol = 1e-9);

// E[R_t] = r0 + delta * t.
double squared_bessel_mean(double t, double r0, double delta);

struct RadialValidation {
  double mean_r = 0.0;           // sample mean of R_{t_end}
  double expected_mean = 0.0;    // R_0 + delta * t_end (at the comparison time)
  double std_error = 0.0;
  double mean_gap_stderr = 0.0;  // |mean - expected| / std_error
  std::optional<double> ks_distance;  // vs the Bessel kernel CDF; absent if delta <= 0
  double delta = 0.0;
  double comparison_time = 0.0;
  int sample_count = 0;
};

// Compares sqrt(R_{t_end}) of a psi-drift ensemble against the explicit Bessel
// kernel started at sqrt(R_0), with dimension (N-1)(2-nu/2).  Requires a point
// initial condition, drift_kind = psi, eps <= 1e-4 and dt <= 1e-4.  For
// delta <= 0 the distributional comparison is skipped; the mean identity is
// then checked at the latest recorded time at which every trajectory still has
// R > 0 (records required), since absorption breaks it afterwards.
RadialValidation validate_radial(const Ensemble& ensemble, const SystemParams& p);

}  // namespace kslab
