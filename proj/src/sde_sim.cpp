#include "kslab/sde_sim.hpp"

#include <cmath>
#include <limits>

#include "kslab/numerics.hpp"
#include "kslab/rng.hpp"

namespace kslab {

InitialCondition InitialCondition::at(Configuration x) {
  InitialCondition ic;
  ic.kind = Kind::point;
  ic.point = std::move(x);
  return ic;
}

InitialCondition InitialCondition::cloud(Configuration center, double spread) {
  InitialCondition ic;
  ic.kind = Kind::gaussian_cloud;
  ic.center = std::move(center);
  ic.spread = spread;
  return ic;
}

void SimSpec::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("SimSpec: dt must be > 0");
  if (!(t_end > 0.0)) throw std::invalid_argument("SimSpec: t_end must be > 0");
  if (dt > t_end) throw std::invalid_argument("SimSpec: dt must be <= t_end");
  if (taming_cap && !(*taming_cap > 0.0 && std::isfinite(*taming_cap))) {
    throw std::invalid_argument("SimSpec: taming_cap must be finite and positive");
  }
  if (initial.kind == InitialCondition::Kind::gaussian_cloud && !(initial.spread >= 0.0)) {
    throw std::invalid_argument("SimSpec: cloud spread must be >= 0");
  }
}

bool Ensemble::is_stopped(int trajectory) const {
  return std::isfinite(stopped_at[static_cast<std::size_t>(trajectory)]);
}

int Ensemble::surviving_count() const {
  int n = 0;
  for (double s : stopped_at) n += std::isfinite(s) ? 0 : 1;
  return n;
}

namespace {

// Effective drift cap: explicit cap if set, else the analytic bound when eps>0.
double effective_cap(const SystemParams& p, const SimSpec& spec) {
  if (spec.taming_cap) return *spec.taming_cap;
  if (p.epsilon > 0.0 && p.nu > 0.0) {
    return p.nu * (p.n_particles - 1) / (2.0 * p.n_particles * std::sqrt(p.epsilon));
  }
  return std::numeric_limits<double>::infinity();
}

void apply_cap(std::vector<double>& b, int n, int d, double cap) {
  if (!std::isfinite(cap)) return;
  for (int i = 0; i < n; ++i) {
    double n2 = 0.0;
    for (int c = 0; c < d; ++c) {
      const double v = b[static_cast<std::size_t>(i) * d + c];
      n2 += v * v;
    }
    const double norm = std::sqrt(n2);
    if (norm > cap) {
      const double s = cap / norm;
      for (int c = 0; c < d; ++c) b[static_cast<std::size_t>(i) * d + c] *= s;
    }
  }
}

Configuration draw_initial(const SystemParams& p, const SimSpec& spec,
                           std::uint64_t trajectory) {
  const InitialCondition& ic = spec.initial;
  if (ic.kind == InitialCondition::Kind::point) return ic.point;
  Configuration x = ic.center;
  std::vector<double> z(static_cast<std::size_t>(p.d));
  for (int i = 0; i < p.n_particles; ++i) {
    rng::fill_block_normals(spec.seed, trajectory, rng::kInitialStep, i, p.d, z.data());
    double* xi = x.block(i);
    for (int c = 0; c < p.d; ++c) xi[c] += ic.spread * z[c];
  }
  return x;
}

struct StepContext {
  const SystemParams& p;
  const SimSpec& spec;
  double cap;
};

void step_in_place(Configuration& x, const StepContext& ctx,
                   std::span<const double> noise, double dt, long trajectory) {
  const SystemParams& p = ctx.p;
  std::vector<double> b = ctx.spec.drift_kind == DriftKind::psi ? drift_psi(x, p)
                                                                : drift_phi(x, p);
  apply_cap(b, p.n_particles, p.d, ctx.cap);
  const double noise_scale = std::sqrt(2.0 * dt);
  bool finite = true;
  for (int k = 0; k < p.dim(); ++k) {
    x.coords[static_cast<std::size_t>(k)] +=
        b[static_cast<std::size_t>(k)] * dt + noise_scale * noise[static_cast<std::size_t>(k)];
    finite = finite && std::isfinite(x.coords[static_cast<std::size_t>(k)]);
  }
  if (!finite) {
    throw NumericalDivergence("numerical divergence: nonfinite state produced", trajectory);
  }
}

struct StepGrid {
  long n_steps;
  double last_dt;
};

StepGrid make_step_grid(const SimSpec& spec) {
  const double ratio = spec.t_end / spec.dt;
  long n = static_cast<long>(std::ceil(ratio - 1e-9));
  if (n < 1) n = 1;
  double last = spec.t_end - (n - 1) * spec.dt;
  return {n, last};
}

Ensemble simulate_impl(const SystemParams& p, const SimSpec& spec, int m,
                       std::optional<double> r_barrier) {
  p.validate();
  spec.validate();
  if (m < 1) throw std::invalid_argument("simulate: M must be >= 1");
  const Configuration* shape = spec.initial.kind == InitialCondition::Kind::point
                                   ? &spec.initial.point
                                   : &spec.initial.center;
  shape->validate();
  if (shape->d != p.d || shape->n_particles != p.n_particles) {
    throw std::invalid_argument("simulate: initial configuration does not match params");
  }
  double r2_barrier = 0.0;
  if (r_barrier) {
    if (!(*r_barrier > 0.0)) throw std::invalid_argument("simulate_stopped: R must be > 0");
    if (spec.initial.kind == InitialCondition::Kind::point &&
        max_pair_distance(spec.initial.point) >= *r_barrier) {
      throw std::invalid_argument("simulate_stopped: initial configuration outside D_R");
    }
    r2_barrier = *r_barrier * *r_barrier;
  }

  Ensemble ens;
  ens.params = p;
  ens.spec = spec;
  ens.m_trajectories = m;
  ens.barrier_r = r_barrier;
  ens.terminal.assign(static_cast<std::size_t>(m), Configuration{});
  ens.stopped_at.assign(static_cast<std::size_t>(m),
                        std::numeric_limits<double>::quiet_NaN());
  if (spec.record_every > 0) ens.records.assign(static_cast<std::size_t>(m), {});

  const StepContext ctx{p, spec, effective_cap(p, spec)};
  const StepGrid grid = make_step_grid(spec);

  parallel_for(0, m, [&](std::int64_t traj) {
    Configuration x = draw_initial(p, spec, static_cast<std::uint64_t>(traj));
    if (r_barrier && spec.initial.kind == InitialCondition::Kind::gaussian_cloud &&
        max_pair_distance(x) >= *r_barrier) {
      throw std::invalid_argument("simulate_stopped: drawn initial outside D_R");
    }
    TrajectoryRecord* rec =
        spec.record_every > 0 ? &ens.records[static_cast<std::size_t>(traj)] : nullptr;
    auto record_sample = [&](double t) {
      rec->times.push_back(t);
      rec->states.push_back(x);
      rec->r_path.push_back(radial_statistic(x));
      rec->min_pair_dist.push_back(min_pair_distance(x));
    };
    if (rec) record_sample(0.0);

    std::vector<double> noise(static_cast<std::size_t>(p.dim()));
    double stopped_time = std::numeric_limits<double>::quiet_NaN();
    double t = 0.0;
    for (long k = 0; k < grid.n_steps; ++k) {
      const double dt_k = k + 1 == grid.n_steps ? grid.last_dt : spec.dt;
      for (int i = 0; i < p.n_particles; ++i) {
        rng::fill_block_normals(spec.seed, static_cast<std::uint64_t>(traj),
                                static_cast<std::uint64_t>(k), i, p.d,
                                noise.data() + static_cast<std::size_t>(i) * p.d);
      }
      try {
        step_in_place(x, ctx, noise, dt_k, traj);
      } catch (NumericalDivergence& e) {
        throw NumericalDivergence(std::string(e.what()) + " (trajectory " +
                                      std::to_string(traj) + ")",
                                  traj);
      }
      t += dt_k;
      if (rec && ((k + 1) % spec.record_every == 0 || k + 1 == grid.n_steps)) {
        record_sample(t);
      }
      if (r_barrier) {
        // post-step check on the discrete skeleton (no bridge correction)
        double max_r2 = 0.0;
        for (int i = 0; i < p.n_particles; ++i) {
          for (int j = i + 1; j < p.n_particles; ++j) {
            double r2 = 0.0;
            for (int c = 0; c < p.d; ++c) {
              const double dc = x.block(i)[c] - x.block(j)[c];
              r2 += dc * dc;
            }
            max_r2 = std::max(max_r2, r2);
          }
        }
        if (max_r2 >= r2_barrier) {
          stopped_time = t;
          break;
        }
      }
    }
    if (rec) {
      rec->stopped_at = std::isfinite(stopped_time)
                            ? std::optional<double>(stopped_time)
                            : std::nullopt;
    }
    ens.terminal[static_cast<std::size_t>(traj)] = std::move(x);
    ens.stopped_at[static_cast<std::size_t>(traj)] = stopped_time;
  });
  return ens;
}

}  // namespace

Configuration em_step(const Configuration& x, const SystemParams& p, const SimSpec& spec,
                      std::span<const double> noise, double dt_override) {
  p.validate();
  if (noise.size() != static_cast<std::size_t>(p.dim())) {
    throw std::invalid_argument("em_step: noise must hold dN values");
  }
  Configuration out = x;
  const StepContext ctx{p, spec, effective_cap(p, spec)};
  step_in_place(out, ctx, noise, dt_override > 0.0 ? dt_override : spec.dt, -1);
  return out;
}

Ensemble simulate_ensemble(const SystemParams& p, const SimSpec& spec, int m) {
  return simulate_impl(p, spec, m, std::nullopt);
}

Ensemble simulate_stopped(const SystemParams& p, const SimSpec& spec, double r_barrier,
                          int m) {
  return simulate_impl(p, spec, m, r_barrier);
}

double blowup_probe(const SystemParams& p, const SimSpec& spec, int m,
                    double floor_frac) {
  if (!(floor_frac > 0.0)) throw std::invalid_argument("blowup_probe: floor must be > 0");
  if (spec.initial.kind != InitialCondition::Kind::point) {
    throw std::invalid_argument("blowup_probe: requires a point initial condition");
  }
  const double r0 = radial_statistic(spec.initial.point);
  if (!(r0 > 0.0)) throw std::invalid_argument("blowup_probe: initial R_0 must be > 0");
  const Ensemble ens = simulate_ensemble(p, spec, m);
  int absorbed = 0;
  for (const Configuration& x : ens.terminal) {
    if (radial_statistic(x) < floor_frac * r0) ++absorbed;
  }
  return static_cast<double>(absorbed) / m;
}

}  // namespace kslab
