#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kslab/core_model.hpp"

// Euler-Maruyama time stepping of the regularized particle SDEs with
// trajectory-parallel ensembles, stopping on the pairwise-distance barrier and
// collision/blow-up diagnostics.  All randomness is counter-based, so a given
// (params, spec, M) triple reproduces bit-identical ensembles on any thread
// count.

namespace kslab {

enum class DriftKind { phi, psi };

struct InitialCondition {
  enum class Kind { point, gaussian_cloud };
  Kind kind = Kind::point;
  Configuration point;   // fixed start (kind == point)
  Configuration center;  // cloud centre (kind == gaussian_cloud)
  double spread = 0.0;   // per-coordinate std deviation of the cloud

  static InitialCondition at(Configuration x);
  static InitialCondition cloud(Configuration center, double spread);
};

struct SimSpec {
  double dt = 1e-3;
  double t_end = 1.0;
  DriftKind drift_kind = DriftKind::psi;
  // Per-block drift cap.  Unset: the analytic bound nu(N-1)/(2N sqrt(eps)) is
  // applied when eps > 0 (a no-op mathematically, a guard numerically) and no
  // cap is applied when eps = 0.
  std::optional<double> taming_cap;
  std::uint64_t seed = 0;
  InitialCondition initial;
  int record_every = 0;  // 0: terminals only; k > 0: record every k-th step

  void validate() const;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<Configuration> states;
  std::vector<double> r_path;          // radial_statistic per sample
  std::vector<double> min_pair_dist;   // min pair distance per sample
  std::optional<double> stopped_at;
  bool absorbed = false;
};

struct Ensemble {
  SystemParams params;
  SimSpec spec;
  int m_trajectories = 0;
  std::optional<double> barrier_r;       // set for stopped ensembles
  std::vector<Configuration> terminal;   // state at t_end, or frozen at stopping
  std::vector<double> stopped_at;        // NaN where the trajectory ran to t_end
  std::vector<TrajectoryRecord> records; // nonempty iff spec.record_every > 0

  bool is_stopped(int trajectory) const;
  int surviving_count() const;  // trajectories that reached t_end unstopped
};

struct NumericalDivergence : std::runtime_error {
  explicit NumericalDivergence(const std::string& what, long trajectory = -1)
      : std::runtime_error(what), trajectory(trajectory) {}
  long trajectory;
};

// One explicit Euler-Maruyama step x' = x + b(x) dt + sqrt(2 dt) xi, with b per
// drift_kind and the optional per-block cap.  `noise` holds dN standard
// normals.  Throws NumericalDivergence if the new state is not finite.
Configuration em_step(const Configuration& x, const SystemParams& p, const SimSpec& spec,
                      std::span<const double> noise, double dt_override = -1.0);

// M independent trajectories; per-trajectory streams derived from (seed, index).
Ensemble simulate_ensemble(const SystemParams& p, const SimSpec& spec, int m);

// As simulate_ensemble, but each trajectory freezes at the first step where
// some pair distance reaches R.  The initial configuration must lie inside the
// barrier (all pair distances < R).
Ensemble simulate_stopped(const SystemParams& p, const SimSpec& spec, double r_barrier,
                          int m);

// Fraction of trajectories whose radial statistic at t_end is below
// floor_frac * R_0.
double blowup_probe(const SystemParams& p, const SimSpec& spec, int m,
                    double floor_frac);

}  // namespace kslab
