// kslab: reproducible command-line laboratory for the regularized interacting
// particle system: threshold curves, ensemble simulation, density estimation,
// radial (Bessel) validation, inequality checks and parameter sweeps.
//
// Exit codes: 0 success, 1 a checked inequality/validation failed beyond its
// tolerance, 2 usage or config error (machine-readable JSON on stderr).

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kslab/bessel_oracle.hpp"
#include "kslab/core_model.hpp"
#include "kslab/density_est.hpp"
#include "kslab/hardy_forms.hpp"
#include "kslab/io.hpp"
#include "kslab/numerics.hpp"
#include "kslab/sde_sim.hpp"
#include "kslab/thresholds.hpp"
#include "kslab/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace kslab;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- config plumbing --------------------------------------------------------

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& context) {
  if (!j.is_object()) throw ConfigError(context + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError(context + ": unknown key '" + it.key() + "'");
    }
  }
}

json load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  if (j.contains("schema_version") && j["schema_version"].get<int>() != 1) {
    throw ConfigError("unsupported schema_version (expected 1)");
  }
  return j;
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

Configuration config_from_coords(const std::vector<double>& coords, int d, int n) {
  if (coords.size() != static_cast<std::size_t>(d) * n) {
    throw ConfigError("initial coords: expected d*N = " + std::to_string(d * n) +
                      " values, got " + std::to_string(coords.size()));
  }
  Configuration x = Configuration::zeros(d, n);
  x.coords = coords;
  return x;
}

SystemParams parse_params(const json& j) {
  reject_unknown_keys(j, {"d", "N", "nu", "epsilon"}, "params");
  SystemParams p;
  p.d = get_or<int>(j, "d", 2);
  p.n_particles = get_or<int>(j, "N", 2);
  p.nu = get_or<double>(j, "nu", 0.0);
  p.epsilon = get_or<double>(j, "epsilon", 0.0);
  p.validate();
  return p;
}

SimSpec parse_sim(const json& j, const SystemParams& p) {
  reject_unknown_keys(
      j, {"dt", "t_end", "drift", "seed", "taming_cap", "record_every", "initial"},
      "sim");
  SimSpec s;
  s.dt = get_or<double>(j, "dt", 1e-3);
  s.t_end = get_or<double>(j, "t_end", 1.0);
  const std::string drift = get_or<std::string>(j, "drift", "psi");
  if (drift == "psi") {
    s.drift_kind = DriftKind::psi;
  } else if (drift == "phi") {
    s.drift_kind = DriftKind::phi;
  } else {
    throw ConfigError("sim.drift must be 'psi' or 'phi'");
  }
  if (!j.contains("seed")) throw ConfigError("sim.seed is required (no wall-clock seeds)");
  s.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("taming_cap") && !j["taming_cap"].is_null()) {
    s.taming_cap = j["taming_cap"].get<double>();
  }
  s.record_every = get_or<int>(j, "record_every", 0);
  if (!j.contains("initial")) throw ConfigError("sim.initial is required");
  const json& ji = j["initial"];
  reject_unknown_keys(ji, {"kind", "coords", "spread"}, "sim.initial");
  const std::string kind = get_or<std::string>(ji, "kind", "point");
  const auto coords = get_or<std::vector<double>>(ji, "coords", {});
  if (kind == "point") {
    s.initial = InitialCondition::at(config_from_coords(coords, p.d, p.n_particles));
  } else if (kind == "gaussian_cloud") {
    s.initial = InitialCondition::cloud(config_from_coords(coords, p.d, p.n_particles),
                                        get_or<double>(ji, "spread", 0.0));
  } else {
    throw ConfigError("sim.initial.kind must be 'point' or 'gaussian_cloud'");
  }
  s.validate();
  return s;
}

json params_to_json(const SystemParams& p) {
  return json{{"d", p.d}, {"N", p.n_particles}, {"nu", p.nu}, {"epsilon", p.epsilon}};
}

json sim_to_json(const SimSpec& s) {
  json ji{{"kind", s.initial.kind == InitialCondition::Kind::point ? "point"
                                                                   : "gaussian_cloud"}};
  ji["coords"] = s.initial.kind == InitialCondition::Kind::point ? s.initial.point.coords
                                                                 : s.initial.center.coords;
  if (s.initial.kind == InitialCondition::Kind::gaussian_cloud) {
    ji["spread"] = s.initial.spread;
  }
  json j{{"dt", s.dt},
         {"t_end", s.t_end},
         {"drift", s.drift_kind == DriftKind::psi ? "psi" : "phi"},
         {"seed", s.seed},
         {"record_every", s.record_every},
         {"initial", ji}};
  if (s.taming_cap) j["taming_cap"] = *s.taming_cap;
  return j;
}

// --- output staging: write to temps, rename on success ----------------------

class OutputStage {
 public:
  explicit OutputStage(const std::string& out_dir) : dir_(out_dir) {
    if (!dir_.empty() && !fs::exists(dir_)) {
      throw ConfigError("output directory does not exist: " + out_dir);
    }
  }

  std::string stage(const std::string& name) {
    const std::string tmp = (dir_ / (name + ".tmp")).string();
    staged_.push_back({tmp, (dir_ / name).string()});
    return tmp;
  }

  void commit() {
    for (const auto& [tmp, final_name] : staged_) {
      fs::rename(tmp, final_name);
    }
    staged_.clear();
  }

  ~OutputStage() {
    for (const auto& [tmp, final_name] : staged_) {
      std::error_code ec;
      fs::remove(tmp, ec);
    }
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> staged_;
};

void write_json_file(const std::string& path, const json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << j.dump(2) << "\n";
}

// CSV with a '#' metadata line carrying the artifact version and the resolved
// config, then an RFC-4180 header and rows.
void write_csv_with_meta(const std::string& path, const json& resolved,
                         const std::vector<std::string>& header,
                         const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "# kslab " << kArtifactVersion << " config=" << resolved.dump() << "\n";
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << (i ? "," : "") << io::format_double(row[i]);
    }
    os << "\n";
  }
}

json summary_skeleton(const std::string& command, const json& resolved) {
  return json{{"artifact_version", kArtifactVersion},
              {"command", command},
              {"resolved_config", resolved}};
}

// --- commands ----------------------------------------------------------------

int cmd_thresholds(const std::string& config_path, int d,
                   const std::vector<double>& n_list, double alpha_step,
                   const std::string& out_dir) {
  json cfg = json::object();
  if (!config_path.empty()) {
    cfg = load_config(config_path);
    reject_unknown_keys(cfg, {"schema_version", "d", "N", "alpha_step", "outputs"},
                        "thresholds config");
  }
  const int dd = d > 0 ? d : get_or<int>(cfg, "d", 2);
  std::vector<double> ns = n_list;
  if (ns.empty()) ns = get_or<std::vector<double>>(cfg, "N", {});
  const double step = alpha_step > 0 ? alpha_step : get_or<double>(cfg, "alpha_step", 1e-3);
  if (ns.empty()) throw ConfigError("thresholds: empty N list");

  json resolved{{"schema_version", 1}, {"d", dd}, {"N", ns}, {"alpha_step", step}};
  OutputStage stage(out_dir);
  json summary = summary_skeleton("thresholds", resolved);
  summary["curves"] = json::array();
  for (double n : ns) {
    const ThresholdCurve curve = nu_max(n, dd, step);
    char name[64];
    std::snprintf(name, sizeof(name), "thresholds_d%d_N%.0f.csv", dd, n);
    std::vector<std::vector<double>> rows;
    rows.reserve(curve.alphas.size());
    for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
      rows.push_back({curve.alphas[i], curve.values[i]});
    }
    write_csv_with_meta(stage.stage(name), resolved, {"alpha", "nu_max"}, rows);
    summary["curves"].push_back(json{{"N", n},
                                     {"csv", name},
                                     {"argmax_alpha", curve.argmax_alpha},
                                     {"max_value", curve.max_value}});
  }
  write_json_file(stage.stage("summary.json"), summary);
  stage.commit();
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
  const json cfg = load_config(config_path);
  reject_unknown_keys(
      cfg, {"schema_version", "params", "sim", "trajectories", "stop_radius", "outputs"},
      "simulate config");
  const SystemParams p = parse_params(cfg.at("params"));
  const SimSpec s = parse_sim(cfg.at("sim"), p);
  const int m = get_or<int>(cfg, "trajectories", 0);
  if (m < 1) throw ConfigError("simulate: trajectories must be >= 1");
  std::optional<double> stop_radius;
  if (cfg.contains("stop_radius") && !cfg["stop_radius"].is_null()) {
    stop_radius = cfg["stop_radius"].get<double>();
  }
  json outputs = cfg.contains("outputs") ? cfg["outputs"] : json::object();
  reject_unknown_keys(outputs, {"binary", "csv", "summary"}, "simulate outputs");
  const std::string bin_name = get_or<std::string>(outputs, "binary", "ensemble.bin");
  const std::string csv_name = get_or<std::string>(outputs, "csv", "terminals.csv");
  const std::string sum_name = get_or<std::string>(outputs, "summary", "summary.json");

  json resolved{{"schema_version", 1},
                {"params", params_to_json(p)},
                {"sim", sim_to_json(s)},
                {"trajectories", m}};
  if (stop_radius) resolved["stop_radius"] = *stop_radius;

  const Ensemble ens = stop_radius ? simulate_stopped(p, s, *stop_radius, m)
                                   : simulate_ensemble(p, s, m);

  OutputStage stage(out_dir);
  io::write_ensemble_binary(stage.stage(bin_name), ens);
  {
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(m) * p.dim());
    for (int i = 0; i < m; ++i) {
      for (int c = 0; c < p.dim(); ++c) {
        rows.push_back(
            {static_cast<double>(i), static_cast<double>(c),
             ens.terminal[static_cast<std::size_t>(i)].coords[static_cast<std::size_t>(c)]});
      }
    }
    write_csv_with_meta(stage.stage(csv_name), resolved,
                        {"trajectory", "coordinate", "value"}, rows);
  }
  json summary = summary_skeleton("simulate", resolved);
  summary["surviving"] = ens.surviving_count();
  summary["stopped"] = m - ens.surviving_count();
  {
    std::vector<double> r(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      r[static_cast<std::size_t>(i)] =
          radial_statistic(ens.terminal[static_cast<std::size_t>(i)]);
    }
    const SampleStats st = sample_stats(r);
    summary["radial_mean"] = st.mean;
    summary["radial_stderr"] = st.std_error;
  }
  summary["outputs"] = json{{"binary", bin_name}, {"csv", csv_name}};
  write_json_file(stage.stage(sum_name), summary);
  stage.commit();
  return 0;
}

int cmd_density(const std::string& config_path, const std::string& out_dir) {
  const json cfg = load_config(config_path);
  reject_unknown_keys(cfg,
                      {"schema_version", "ensemble", "t", "bandwidth", "bias_correct",
                       "query", "bound", "outputs"},
                      "density config");
  const std::string ens_path = get_or<std::string>(cfg, "ensemble", "");
  if (ens_path.empty()) throw ConfigError("density: 'ensemble' path is required");
  const Ensemble ens = io::read_ensemble_binary(ens_path);
  const double t = get_or<double>(cfg, "t", ens.spec.t_end);
  std::optional<double> bandwidth;
  if (cfg.contains("bandwidth") && !cfg["bandwidth"].is_null()) {
    bandwidth = cfg["bandwidth"].get<double>();
  }
  const bool bias_correct = get_or<bool>(cfg, "bias_correct", true);

  if (!cfg.contains("query")) throw ConfigError("density: 'query' is required");
  const json& jq = cfg["query"];
  reject_unknown_keys(jq,
                      {"kind", "base_coords", "separations", "span", "points_per_axis",
                       "max_points", "points"},
                      "density query");
  const std::string kind = get_or<std::string>(jq, "kind", "");
  std::vector<Configuration> queries;
  if (kind == "transect") {
    const Configuration base =
        config_from_coords(get_or<std::vector<double>>(jq, "base_coords", {}),
                           ens.params.d, ens.params.n_particles);
    queries = transect_queries(base, get_or<std::vector<double>>(jq, "separations", {}));
  } else if (kind == "lattice") {
    const Configuration base =
        config_from_coords(get_or<std::vector<double>>(jq, "base_coords", {}),
                           ens.params.d, ens.params.n_particles);
    queries = lattice_queries(base, get_or<double>(jq, "span", 1.0),
                              get_or<int>(jq, "points_per_axis", 3),
                              get_or<int>(jq, "max_points", 729));
  } else if (kind == "points") {
    for (const auto& pt : jq.at("points")) {
      queries.push_back(config_from_coords(pt.get<std::vector<double>>(), ens.params.d,
                                           ens.params.n_particles));
    }
  } else {
    throw ConfigError("density query.kind must be transect, lattice or points");
  }
  if (queries.empty()) throw ConfigError("density: empty query set");

  json resolved{{"schema_version", 1},
                {"ensemble", ens_path},
                {"t", t},
                {"bias_correct", bias_correct},
                {"query", jq},
                {"params", params_to_json(ens.params)}};
  if (bandwidth) resolved["bandwidth"] = *bandwidth;

  const DensityEstimate est = estimate_density(ens, t, queries, bandwidth, bias_correct);

  json outputs = cfg.contains("outputs") ? cfg["outputs"] : json::object();
  reject_unknown_keys(outputs, {"csv", "summary"}, "density outputs");
  OutputStage stage(out_dir);
  {
    std::vector<std::string> header;
    for (int c = 0; c < ens.params.dim(); ++c) header.push_back("y" + std::to_string(c));
    header.insert(header.end(), {"p_hat", "stderr", "phi_eps", "ratio"});
    std::vector<std::vector<double>> rows;
    const std::vector<double> q = weighted_kernel(est, ens.params);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      std::vector<double> row = queries[i].coords;
      const PhiValue pv = phi_eps(queries[i], ens.params);
      row.push_back(est.values[i]);
      row.push_back(est.std_error[i]);
      row.push_back(pv.value);
      row.push_back(q[i]);
      rows.push_back(std::move(row));
    }
    write_csv_with_meta(stage.stage(get_or<std::string>(outputs, "csv", "density.csv")),
                        resolved, header, rows);
  }
  json summary = summary_skeleton("density", resolved);
  summary["m_total"] = est.m_total;
  summary["m_used"] = est.m_used;
  summary["bandwidth"] = est.bandwidth;
  if (cfg.contains("bound") && !cfg["bound"].is_null()) {
    const json& jb = cfg["bound"];
    reject_unknown_keys(jb, {"kind", "x_coords", "c4_candidates"}, "density bound");
    const std::string bk = get_or<std::string>(jb, "kind", "");
    BoundKind kindv;
    if (bk == "thm1") {
      kindv = BoundKind::thm1;
    } else if (bk == "thm2") {
      kindv = BoundKind::thm2;
    } else if (bk == "thm3") {
      kindv = BoundKind::thm3;
    } else {
      throw ConfigError("bound.kind must be thm1, thm2 or thm3");
    }
    const Configuration x =
        config_from_coords(get_or<std::vector<double>>(jb, "x_coords", {}), ens.params.d,
                           ens.params.n_particles);
    const std::vector<double> c4 =
        get_or<std::vector<double>>(jb, "c4_candidates", {2.0, 4.0, 8.0, 16.0});
    const BoundFit fit = fit_bound(est, t, ens.params, kindv, x, c4);
    json jf{{"kind", bk},
            {"fitted_constant", fit.fitted_constant},
            {"sup_point", fit.sup_point.coords},
            {"excluded", fit.excluded}};
    if (fit.fitted_c4) jf["fitted_c4"] = *fit.fitted_c4;
    summary["bound_fit"] = jf;
  }
  write_json_file(stage.stage(get_or<std::string>(outputs, "summary", "summary.json")),
                  summary);
  stage.commit();
  return 0;
}

int cmd_bessel_validate(const std::string& config_path, const std::string& out_dir) {
  const json cfg = load_config(config_path);
  reject_unknown_keys(cfg,
                      {"schema_version", "params", "sim", "trajectories", "ks_max",
                       "mean_gap_max", "outputs"},
                      "bessel-validate config");
  const SystemParams p = parse_params(cfg.at("params"));
  const SimSpec s = parse_sim(cfg.at("sim"), p);
  const int m = get_or<int>(cfg, "trajectories", 0);
  if (m < 1) throw ConfigError("bessel-validate: trajectories must be >= 1");
  const double ks_max = get_or<double>(cfg, "ks_max", 0.02);
  const double gap_max = get_or<double>(cfg, "mean_gap_max", 4.0);

  json resolved{{"schema_version", 1},
                {"params", params_to_json(p)},
                {"sim", sim_to_json(s)},
                {"trajectories", m},
                {"ks_max", ks_max},
                {"mean_gap_max", gap_max}};
  const Ensemble ens = simulate_ensemble(p, s, m);
  const RadialValidation v = validate_radial(ens, p);

  json outputs = cfg.contains("outputs") ? cfg["outputs"] : json::object();
  reject_unknown_keys(outputs, {"summary"}, "bessel-validate outputs");
  OutputStage stage(out_dir);
  json summary = summary_skeleton("bessel-validate", resolved);
  summary["delta"] = v.delta;
  summary["mean_r"] = v.mean_r;
  summary["expected_mean"] = v.expected_mean;
  summary["std_error"] = v.std_error;
  summary["mean_gap_stderr"] = v.mean_gap_stderr;
  summary["comparison_time"] = v.comparison_time;
  summary["sample_count"] = v.sample_count;
  if (v.ks_distance) {
    summary["ks_distance"] = *v.ks_distance;
  } else {
    summary["ks_distance"] = nullptr;
  }
  const bool ok =
      v.mean_gap_stderr <= gap_max && (!v.ks_distance || *v.ks_distance <= ks_max);
  summary["pass"] = ok;
  write_json_file(stage.stage(get_or<std::string>(outputs, "summary", "report.json")),
                  summary);
  stage.commit();
  if (!ok) throw CheckFailure("radial validation outside tolerance");
  return 0;
}

int cmd_hardy_check(const std::string& config_path, const std::string& out_dir) {
  const json cfg = load_config(config_path);
  reject_unknown_keys(cfg,
                      {"schema_version", "check", "alpha", "d", "N", "nu", "epsilon",
                       "grid", "seeds", "tolerance", "probe", "outputs"},
                      "hardy-check config");
  const std::string check = get_or<std::string>(cfg, "check", "");
  const double alpha = get_or<double>(cfg, "alpha", 1.0);
  const double tol = get_or<double>(cfg, "tolerance", 0.02);
  const int seeds = get_or<int>(cfg, "seeds", 20);
  json jg = cfg.contains("grid") ? cfg["grid"] : json::object();
  reject_unknown_keys(jg, {"n", "box", "kmax"}, "hardy-check grid");
  const int n = get_or<int>(jg, "n", 256);
  const double box = get_or<double>(jg, "box", 16.0);
  const int kmax = get_or<int>(jg, "kmax", 6);

  json resolved{{"schema_version", 1}, {"check", check}, {"alpha", alpha},
                {"tolerance", tol},    {"seeds", seeds}, {"grid", jg}};

  OutputStage stage(out_dir);
  json outputs = cfg.contains("outputs") ? cfg["outputs"] : json::object();
  reject_unknown_keys(outputs, {"csv", "summary"}, "hardy-check outputs");
  json summary = summary_skeleton("hardy-check", resolved);
  std::vector<std::vector<double>> rows;
  double max_ratio = 0.0;
  bool pass = true;

  if (check == "hardy2d") {
    for (int seed = 1; seed <= seeds; ++seed) {
      GridFunction f =
          random_band_limited(2, n, box, kmax, static_cast<std::uint64_t>(seed));
      const double r = hardy_ratio_2d(f, alpha);
      rows.push_back({static_cast<double>(seed), r});
      max_ratio = std::max(max_ratio, r);
    }
    pass = max_ratio <= 1.0 + tol;
  } else if (check == "many_particle") {
    const int d = get_or<int>(cfg, "d", 3);
    const int np = get_or<int>(cfg, "N", 2);
    resolved["d"] = d;
    resolved["N"] = np;
    for (int seed = 1; seed <= seeds; ++seed) {
      GridFunction f =
          random_band_limited(d * np, n, box, kmax, static_cast<std::uint64_t>(seed));
      const double r = many_particle_hardy_ratio(f, d, np);
      rows.push_back({static_cast<double>(seed), r});
      max_ratio = std::max(max_ratio, r);
    }
    pass = max_ratio <= 1.0 + tol;
  } else if (check == "form_bound") {
    SystemParams p;
    p.d = get_or<int>(cfg, "d", 2);
    p.n_particles = get_or<int>(cfg, "N", 2);
    p.nu = get_or<double>(cfg, "nu", 0.1);
    p.epsilon = get_or<double>(cfg, "epsilon", 0.0);
    p.validate();
    resolved["params"] = params_to_json(p);
    for (int seed = 1; seed <= seeds; ++seed) {
      GridFunction g =
          random_band_limited(p.dim(), n, box, kmax, static_cast<std::uint64_t>(seed));
      const FormBoundResult r = form_bound_ratio(g, alpha, p);
      rows.push_back({static_cast<double>(seed), r.ratio});
      max_ratio = std::max(max_ratio, r.ratio);
      summary["delta"] = r.delta;
      summary["delta_admissible"] = r.delta_admissible;
    }
    pass = max_ratio <= 1.0 + tol;
  } else if (check == "sobolev") {
    SystemParams p;
    p.d = get_or<int>(cfg, "d", 3);
    p.n_particles = get_or<int>(cfg, "N", 2);
    p.nu = get_or<double>(cfg, "nu", 0.5);
    p.epsilon = get_or<double>(cfg, "epsilon", 1e-2);
    p.validate();
    resolved["params"] = params_to_json(p);
    SobolevFamilyFit fit;
    double min_ratio = std::numeric_limits<double>::infinity();
    bool resolved_ok = true;
    for (int seed = 1; seed <= seeds; ++seed) {
      GridFunction u =
          random_band_limited(p.dim(), n, box, kmax, static_cast<std::uint64_t>(seed));
      const SobolevResult r = weighted_sobolev_ratio(u, p);
      rows.push_back({static_cast<double>(seed), r.ratio});
      fit.add(r);
      min_ratio = std::min(min_ratio, r.ratio);
      resolved_ok = resolved_ok && r.resolved;
      max_ratio = std::max(max_ratio, r.ratio);
    }
    summary["fitted_C"] = fit.fitted_c;
    summary["family_spread"] = fit.fitted_c / min_ratio;
    summary["grid_resolves_phi"] = resolved_ok;
    pass = std::isfinite(fit.fitted_c) && fit.fitted_c / min_ratio <= 10.0;
  } else if (check == "sharpness") {
    json jp = cfg.contains("probe") ? cfg["probe"] : json::object();
    reject_unknown_keys(jp, {"k_scales", "a_min", "a_max", "threshold"}, "probe");
    const SharpnessProbeResult probe = hardy_sharpness_probe(
        alpha, get_or<int>(jp, "k_scales", 48), get_or<double>(jp, "a_min", 1e-6),
        get_or<double>(jp, "a_max", 1e6));
    const double threshold = get_or<double>(jp, "threshold", 0.9);
    resolved["probe"] = jp;
    for (std::size_t i = 0; i < probe.scales.size(); ++i) {
      rows.push_back({probe.scales[i], probe.weights[i]});
    }
    summary["sup_ratio"] = probe.sup_ratio;
    max_ratio = probe.sup_ratio;
    pass = probe.sup_ratio >= threshold;
  } else {
    throw ConfigError(
        "check must be one of hardy2d, many_particle, form_bound, sobolev, sharpness");
  }

  summary["max_ratio"] = max_ratio;
  summary["pass"] = pass;
  write_csv_with_meta(stage.stage(get_or<std::string>(outputs, "csv", "ratios.csv")),
                      resolved,
                      check == "sharpness" ? std::vector<std::string>{"scale", "weight"}
                                           : std::vector<std::string>{"seed", "ratio"},
                      rows);
  write_json_file(stage.stage(get_or<std::string>(outputs, "summary", "report.json")),
                  summary);
  stage.commit();
  if (!pass) throw CheckFailure("hardy-check '" + check + "' outside tolerance");
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& nu_range,
              const std::string& probe, int d, int n_particles,
              const std::string& out_dir) {
  json cfg = json::object();
  if (!config_path.empty()) {
    cfg = load_config(config_path);
    reject_unknown_keys(cfg,
                        {"schema_version", "nu", "probe", "d", "N", "epsilon", "dt",
                         "t_end", "seed", "trajectories", "floor", "initial_coords",
                         "outputs"},
                        "sweep config");
  }
  const std::string nu_spec =
      !nu_range.empty() ? nu_range : get_or<std::string>(cfg, "nu", "");
  if (nu_spec.empty()) throw ConfigError("sweep: --nu a:b:step is required");
  double nu_lo, nu_hi, nu_step;
  if (std::sscanf(nu_spec.c_str(), "%lf:%lf:%lf", &nu_lo, &nu_hi, &nu_step) != 3 ||
      nu_step <= 0.0 || nu_hi < nu_lo) {
    throw ConfigError("sweep: bad --nu range (expected a:b:step)");
  }
  const std::string probe_kind =
      !probe.empty() ? probe : get_or<std::string>(cfg, "probe", "blowup");
  if (probe_kind != "blowup") {
    throw ConfigError("sweep: unknown probe '" + probe_kind + "'");
  }
  SystemParams p;
  p.d = d > 0 ? d : get_or<int>(cfg, "d", 2);
  p.n_particles = n_particles > 0 ? n_particles : get_or<int>(cfg, "N", 2);
  p.epsilon = get_or<double>(cfg, "epsilon", 1e-4);
  SimSpec s;
  s.dt = get_or<double>(cfg, "dt", 1e-5);
  s.t_end = get_or<double>(cfg, "t_end", 2.0);
  s.drift_kind = DriftKind::psi;
  s.seed = get_or<std::uint64_t>(cfg, "seed", 1);
  const int m = get_or<int>(cfg, "trajectories", 400);
  const double floor_frac = get_or<double>(cfg, "floor", 0.01);
  std::vector<double> init = get_or<std::vector<double>>(cfg, "initial_coords", {});
  if (init.empty()) {
    init.assign(static_cast<std::size_t>(p.d) * p.n_particles, 0.0);
    // default: particles on a line with unit spacing
    for (int i = 0; i < p.n_particles; ++i) {
      init[static_cast<std::size_t>(i) * p.d] = static_cast<double>(i);
    }
  }
  s.initial = InitialCondition::at(config_from_coords(init, p.d, p.n_particles));

  json resolved{{"schema_version", 1}, {"nu", nu_spec},
                {"probe", probe_kind},  {"d", p.d},
                {"N", p.n_particles},   {"epsilon", p.epsilon},
                {"dt", s.dt},           {"t_end", s.t_end},
                {"seed", s.seed},       {"trajectories", m},
                {"floor", floor_frac},  {"initial_coords", init}};

  OutputStage stage(out_dir);
  std::vector<std::vector<double>> rows;
  for (double nu = nu_lo; nu <= nu_hi + 1e-12; nu += nu_step) {
    p.nu = nu;
    p.validate();
    rows.push_back({nu, blowup_probe(p, s, m, floor_frac)});
  }
  json outputs = cfg.contains("outputs") ? cfg["outputs"] : json::object();
  reject_unknown_keys(outputs, {"csv", "summary"}, "sweep outputs");
  write_csv_with_meta(stage.stage(get_or<std::string>(outputs, "csv", "sweep.csv")),
                      resolved, {"nu", "absorbed_fraction"}, rows);
  json summary = summary_skeleton("sweep", resolved);
  summary["rows"] = rows.size();
  write_json_file(stage.stage(get_or<std::string>(outputs, "summary", "summary.json")),
                  summary);
  stage.commit();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kslab: particle-system thresholds, simulation and verification"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  int d = 0, n_particles = 0;
  std::vector<double> n_list;
  double alpha_step = 0.0;
  std::string nu_range, probe;

  CLI::App* c_thr = app.add_subcommand("thresholds", "threshold curves and maximizers");
  c_thr->add_option("--config", config_path);
  c_thr->add_option("--d", d);
  c_thr->add_option("--N", n_list)->delimiter(',');
  c_thr->add_option("--alpha-step", alpha_step);
  c_thr->add_option("--out", out_dir);

  CLI::App* c_sim = app.add_subcommand("simulate", "run an ensemble and dump it");
  c_sim->add_option("--config", config_path)->required();
  c_sim->add_option("--out", out_dir);

  CLI::App* c_den = app.add_subcommand("density", "estimate densities from a dump");
  c_den->add_option("--config", config_path)->required();
  c_den->add_option("--out", out_dir);

  CLI::App* c_bes = app.add_subcommand("bessel-validate", "radial-law validation");
  c_bes->add_option("--config", config_path)->required();
  c_bes->add_option("--out", out_dir);

  CLI::App* c_har = app.add_subcommand("hardy-check", "inequality checks");
  c_har->add_option("--config", config_path)->required();
  c_har->add_option("--out", out_dir);

  CLI::App* c_swp = app.add_subcommand("sweep", "parameter sweeps");
  c_swp->add_option("--config", config_path);
  c_swp->add_option("--nu", nu_range);
  c_swp->add_option("--probe", probe);
  c_swp->add_option("--d", d);
  c_swp->add_option("--N", n_particles);
  c_swp->add_option("--out", out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << nlohmann::json{{"error", e.what()}, {"kind", "usage"}}.dump() << "\n";
    return 2;
  }

  try {
    if (c_thr->parsed()) return cmd_thresholds(config_path, d, n_list, alpha_step, out_dir);
    if (c_sim->parsed()) return cmd_simulate(config_path, out_dir);
    if (c_den->parsed()) return cmd_density(config_path, out_dir);
    if (c_bes->parsed()) return cmd_bessel_validate(config_path, out_dir);
    if (c_har->parsed()) return cmd_hardy_check(config_path, out_dir);
    if (c_swp->parsed()) {
      return cmd_sweep(config_path, nu_range, probe, d, n_particles, out_dir);
    }
  } catch (const CheckFailure& e) {
    std::cerr << nlohmann::json{{"error", e.what()}, {"kind", "check_failure"}}.dump()
              << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << nlohmann::json{{"error", e.what()}, {"kind", "config"}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}, {"kind", "runtime"}}.dump() << "\n";
    return 2;
  }
  return 2;
}
