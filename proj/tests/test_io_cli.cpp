#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "kslab/io.hpp"
#include "kslab/sde_sim.hpp"

using namespace kslab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("kslab_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Ensemble small_ensemble(double t_end = 0.25, std::optional<double> barrier = {}) {
  SystemParams p;
  p.d = 2;
  p.n_particles = 2;
  p.nu = 1.0;
  p.epsilon = 1e-2;
  SimSpec s;
  s.dt = 1e-2;
  s.t_end = t_end;
  s.drift_kind = DriftKind::psi;
  s.seed = 12;
  Configuration x = Configuration::zeros(2, 2);
  x.block(0)[0] = 0.5;
  x.block(1)[0] = -0.5;
  s.initial = InitialCondition::at(x);
  return barrier ? simulate_stopped(p, s, *barrier, 40) : simulate_ensemble(p, s, 40);
}

int run_cli(const std::string& args, const std::string& out_file,
            const std::string& err_file) {
  const std::string cmd = std::string(KSLAB_CLI_PATH) + " " + args + " > " + out_file +
                          " 2> " + err_file;
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, -3.25e-17, 1234567.875, 6.62607015e-34}) {
    CHECK(std::stod(io::format_double(v)) == v);
  }
}

TEST_CASE("ensemble binary dump round-trips bit-exactly") {
  TempDir dir;
  const Ensemble ens = small_ensemble(0.25, 1.5);
  const std::string path = dir.file("e.bin");
  io::write_ensemble_binary(path, ens);
  const Ensemble back = io::read_ensemble_binary(path);
  CHECK(back.params.d == ens.params.d);
  CHECK(back.params.n_particles == ens.params.n_particles);
  CHECK(back.params.nu == ens.params.nu);
  CHECK(back.params.epsilon == ens.params.epsilon);
  CHECK(back.spec.dt == ens.spec.dt);
  CHECK(back.spec.t_end == ens.spec.t_end);
  CHECK(back.spec.seed == ens.spec.seed);
  CHECK(back.m_trajectories == ens.m_trajectories);
  REQUIRE(back.barrier_r.has_value());
  CHECK(*back.barrier_r == 1.5);
  for (int m = 0; m < ens.m_trajectories; ++m) {
    const bool stopped = ens.is_stopped(m);
    CHECK(back.is_stopped(m) == stopped);
    if (stopped) CHECK(back.stopped_at[m] == ens.stopped_at[m]);
    for (int c = 0; c < 4; ++c) {
      CHECK(back.terminal[m].coords[c] == ens.terminal[m].coords[c]);
    }
  }
}

TEST_CASE("read_ensemble_binary rejects foreign files") {
  TempDir dir;
  const std::string path = dir.file("junk.bin");
  std::ofstream(path) << "not an ensemble";
  CHECK_THROWS(io::read_ensemble_binary(path));
}

TEST_CASE("write_csv emits LF rows with 17 significant digits") {
  TempDir dir;
  const std::string path = dir.file("t.csv");
  io::write_csv(path, {"a", "b"}, {{1.0, 0.1}, {-2.5, 3.0e-9}});
  const std::string body = slurp(path);
  CHECK(body == "a,b\n1,0.10000000000000001\n-2.5,3e-09\n");
}

TEST_CASE("cli: thresholds command writes curves; empty N exits 2") {
  TempDir dir;
  const int rc = run_cli("thresholds --d 3 --N 2 --out " + dir.path.string(),
                         dir.file("out.txt"), dir.file("err.txt"));
  CHECK(rc == 0);
  const std::string summary = slurp(dir.file("summary.json"));
  CHECK(summary.find("\"max_value\": 1.0") != std::string::npos);
  const std::string csv = slurp(dir.file("thresholds_d3_N2.csv"));
  CHECK(csv.find("alpha,nu_max") != std::string::npos);

  const int rc2 = run_cli("thresholds --d 2 --out " + dir.path.string(),
                          dir.file("out2.txt"), dir.file("err2.txt"));
  CHECK(rc2 == 2);
  CHECK(slurp(dir.file("err2.txt")).find("empty N list") != std::string::npos);
}

TEST_CASE("cli: simulate is byte-deterministic and validates config") {
  TempDir dir;
  const std::string cfg = dir.file("sim.json");
  std::ofstream(cfg) << R"({
    "schema_version": 1,
    "params": {"d": 2, "N": 2, "nu": 0.5, "epsilon": 0.01},
    "sim": {"dt": 0.01, "t_end": 0.1, "drift": "psi", "seed": 7,
            "initial": {"kind": "point", "coords": [0.5, 0, -0.5, 0]}},
    "trajectories": 50
  })";
  fs::create_directories(dir.path / "a");
  fs::create_directories(dir.path / "b");
  CHECK(run_cli("simulate --config " + cfg + " --out " + (dir.path / "a").string(),
                dir.file("o1"), dir.file("e1")) == 0);
  CHECK(run_cli("simulate --config " + cfg + " --out " + (dir.path / "b").string(),
                dir.file("o2"), dir.file("e2")) == 0);
  CHECK(slurp((dir.path / "a" / "ensemble.bin").string()) ==
        slurp((dir.path / "b" / "ensemble.bin").string()));
  CHECK(slurp((dir.path / "a" / "terminals.csv").string()) ==
        slurp((dir.path / "b" / "terminals.csv").string()));
  CHECK(slurp((dir.path / "a" / "summary.json").string()) ==
        slurp((dir.path / "b" / "summary.json").string()));

  // unknown keys are rejected with exit code 2
  const std::string bad = dir.file("bad.json");
  std::ofstream(bad) << R"({"params": {"d": 2, "N": 2}, "simm": {}})";
  CHECK(run_cli("simulate --config " + bad + " --out " + dir.path.string(),
                dir.file("o3"), dir.file("e3")) == 2);
  CHECK(slurp(dir.file("e3")).find("unknown key") != std::string::npos);

  // missing output directory exits 2 and leaves nothing behind
  CHECK(run_cli("simulate --config " + cfg + " --out " + dir.file("missing_dir"),
                dir.file("o4"), dir.file("e4")) == 2);
}

TEST_CASE("cli: density consumes a dump and reports a bound fit") {
  TempDir dir;
  const std::string simcfg = dir.file("sim.json");
  std::ofstream(simcfg) << R"({
    "params": {"d": 2, "N": 2, "nu": 0.0, "epsilon": 0.0},
    "sim": {"dt": 1.0, "t_end": 1.0, "drift": "psi", "seed": 3,
            "initial": {"kind": "point", "coords": [0.5, 0, -0.5, 0]}},
    "trajectories": 5000
  })";
  REQUIRE(run_cli("simulate --config " + simcfg + " --out " + dir.path.string(),
                  dir.file("o1"), dir.file("e1")) == 0);
  const std::string dencfg = dir.file("den.json");
  std::ofstream(dencfg) << R"({
    "ensemble": ")" << (dir.path / "ensemble.bin").string() << R"(",
    "t": 1.0,
    "query": {"kind": "transect", "base_coords": [0.5, 0, -0.5, 0],
              "separations": [0.05, 0.5, 1.0, 1.5]},
    "bound": {"kind": "thm1", "x_coords": [0.5, 0, -0.5, 0]}
  })";
  REQUIRE(run_cli("density --config " + dencfg + " --out " + dir.path.string(),
                  dir.file("o2"), dir.file("e2")) == 0);
  const std::string csv = slurp((dir.path / "density.csv").string());
  CHECK(csv.find("y0,y1,y2,y3,p_hat,stderr,phi_eps,ratio") != std::string::npos);
  const std::string summary = slurp((dir.path / "summary.json").string());
  CHECK(summary.find("bound_fit") != std::string::npos);
  CHECK(summary.find("fitted_constant") != std::string::npos);
}

TEST_CASE("cli: hardy-check sharpness passes and writes reports") {
  TempDir dir;
  const std::string cfg = dir.file("h.json");
  std::ofstream(cfg) << R"({
    "check": "sharpness", "alpha": 1.0,
    "probe": {"k_scales": 32, "a_min": 1e-6, "a_max": 1e6, "threshold": 0.9}
  })";
  CHECK(run_cli("hardy-check --config " + cfg + " --out " + dir.path.string(),
                dir.file("o"), dir.file("e")) == 0);
  const std::string summary = slurp((dir.path / "report.json").string());
  CHECK(summary.find("\"pass\": true") != std::string::npos);

  // an impossible threshold turns into exit code 1 (check failure)
  const std::string cfg2 = dir.file("h2.json");
  std::ofstream(cfg2) << R"({
    "check": "sharpness", "alpha": 1.0,
    "probe": {"k_scales": 16, "a_min": 0.01, "a_max": 100.0, "threshold": 0.99}
  })";
  CHECK(run_cli("hardy-check --config " + cfg2 + " --out " + dir.path.string(),
                dir.file("o2"), dir.file("e2")) == 1);
}

TEST_CASE("cli: sweep produces the absorbed-fraction table") {
  TempDir dir;
  const std::string cfg = dir.file("s.json");
  std::ofstream(cfg) << R"({
    "epsilon": 1e-4, "dt": 1e-4, "t_end": 0.2, "seed": 5,
    "trajectories": 40, "floor": 0.01,
    "initial_coords": [0.5, 0, -0.5, 0]
  })";
  CHECK(run_cli("sweep --nu 0:4:2 --d 2 --N 2 --probe blowup --config " + cfg +
                    " --out " + dir.path.string(),
                dir.file("o"), dir.file("e")) == 0);
  const std::string csv = slurp((dir.path / "sweep.csv").string());
  CHECK(csv.find("nu,absorbed_fraction") != std::string::npos);
  // three rows: nu = 0, 2, 4
  int lines = 0;
  for (char ch : csv) lines += ch == '\n' ? 1 : 0;
  CHECK(lines == 5);  // meta + header + 3 rows
}

TEST_CASE("threshold curve CSV exporter") {
  TempDir dir;
  kslab::ThresholdCurve c;
  c.alphas = {1.0, 1.5};
  c.values = {0.25, 0.5};
  const std::string path = dir.file("curve.csv");
  io::write_threshold_curve_csv(path, c);
  CHECK(slurp(path) == "alpha,nu_max\n1,0.25\n1.5,0.5\n");
}

TEST_CASE("cli: bessel-validate reports the radial comparison") {
  TempDir dir;
  const std::string cfg = dir.file("b.json");
  std::ofstream(cfg) << R"({
    "params": {"d": 2, "N": 2, "nu": 0.0, "epsilon": 0.0},
    "sim": {"dt": 1e-4, "t_end": 0.05, "drift": "psi", "seed": 4,
            "initial": {"kind": "point", "coords": [0.5, 0, -0.5, 0]}},
    "trajectories": 2000, "ks_max": 0.08, "mean_gap_max": 4.0
  })";
  CHECK(run_cli("bessel-validate --config " + cfg + " --out " + dir.path.string(),
                dir.file("o"), dir.file("e")) == 0);
  const std::string report = slurp((dir.path / "report.json").string());
  CHECK(report.find("\"delta\": 2.0") != std::string::npos);
  CHECK(report.find("ks_distance") != std::string::npos);
  CHECK(report.find("\"pass\": true") != std::string::npos);
  // the phi drift violates the reduction's precondition: config error
  const std::string bad = dir.file("b2.json");
  std::ofstream(bad) << R"({
    "params": {"d": 2, "N": 2, "nu": 0.0, "epsilon": 0.0},
    "sim": {"dt": 1e-4, "t_end": 0.05, "drift": "phi", "seed": 4,
            "initial": {"kind": "point", "coords": [0.5, 0, -0.5, 0]}},
    "trajectories": 2000
  })";
  CHECK(run_cli("bessel-validate --config " + bad + " --out " + dir.path.string(),
                dir.file("o2"), dir.file("e2")) == 2);
}

TEST_CASE("cli: hardy-check on the grid inequality") {
  TempDir dir;
  const std::string cfg = dir.file("h.json");
  std::ofstream(cfg) << R"({
    "check": "hardy2d", "alpha": 1.5, "seeds": 5,
    "grid": {"n": 64, "box": 16.0, "kmax": 4}
  })";
  CHECK(run_cli("hardy-check --config " + cfg + " --out " + dir.path.string(),
                dir.file("o"), dir.file("e")) == 0);
  const std::string csv = slurp((dir.path / "ratios.csv").string());
  CHECK(csv.find("seed,ratio") != std::string::npos);
  const std::string report = slurp((dir.path / "report.json").string());
  CHECK(report.find("\"pass\": true") != std::string::npos);
  CHECK(report.find("max_ratio") != std::string::npos);
}
