#include "kslab/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace kslab {
namespace io {

namespace {

constexpr char kMagic[4] = {'K', 'S', 'E', 'N'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(os, bits);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  const std::uint64_t bits = get_u64(is);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path, std::ios::binary);  // binary: LF endings everywhere
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    os << (i ? "," : "") << header[i];
  }
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << (i ? "," : "") << format_double(row[i]);
    }
    os << "\n";
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

void write_threshold_curve_csv(const std::string& path, const ThresholdCurve& curve) {
  std::vector<std::vector<double>> rows;
  rows.reserve(curve.alphas.size());
  for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
    rows.push_back({curve.alphas[i], curve.values[i]});
  }
  write_csv(path, {"alpha", "nu_max"}, rows);
}

void write_ensemble_csv(const std::string& path, const Ensemble& ensemble) {
  std::vector<std::vector<double>> rows;
  rows.reserve(ensemble.terminal.size() * static_cast<std::size_t>(ensemble.params.dim()));
  for (int m = 0; m < ensemble.m_trajectories; ++m) {
    const Configuration& x = ensemble.terminal[static_cast<std::size_t>(m)];
    for (int c = 0; c < ensemble.params.dim(); ++c) {
      rows.push_back({static_cast<double>(m), static_cast<double>(c),
                      x.coords[static_cast<std::size_t>(c)]});
    }
  }
  write_csv(path, {"trajectory", "coordinate", "value"}, rows);
}

void write_ensemble_binary(const std::string& path, const Ensemble& ensemble) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(ensemble.params.d));
  put_u32(os, static_cast<std::uint32_t>(ensemble.params.n_particles));
  put_f64(os, ensemble.params.nu);
  put_f64(os, ensemble.params.epsilon);
  put_f64(os, ensemble.spec.dt);
  put_f64(os, ensemble.spec.t_end);
  put_u32(os, ensemble.spec.drift_kind == DriftKind::psi ? 1u : 0u);
  put_u64(os, ensemble.spec.seed);
  put_f64(os, ensemble.barrier_r ? *ensemble.barrier_r
                                 : std::numeric_limits<double>::quiet_NaN());
  put_u64(os, static_cast<std::uint64_t>(ensemble.m_trajectories));
  for (int m = 0; m < ensemble.m_trajectories; ++m) {
    put_f64(os, ensemble.stopped_at[static_cast<std::size_t>(m)]);
    const Configuration& x = ensemble.terminal[static_cast<std::size_t>(m)];
    for (double v : x.coords) put_f64(os, v);
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

Ensemble read_ensemble_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("not an ensemble dump: " + path);
  }
  const std::uint32_t version = get_u32(is);
  if (version != kVersion) throw std::runtime_error("unsupported ensemble dump version");
  Ensemble ens;
  ens.params.d = static_cast<int>(get_u32(is));
  ens.params.n_particles = static_cast<int>(get_u32(is));
  ens.params.nu = get_f64(is);
  ens.params.epsilon = get_f64(is);
  ens.spec.dt = get_f64(is);
  ens.spec.t_end = get_f64(is);
  ens.spec.drift_kind = get_u32(is) == 1u ? DriftKind::psi : DriftKind::phi;
  ens.spec.seed = get_u64(is);
  const double barrier = get_f64(is);
  if (std::isfinite(barrier)) ens.barrier_r = barrier;
  ens.m_trajectories = static_cast<int>(get_u64(is));
  ens.terminal.reserve(static_cast<std::size_t>(ens.m_trajectories));
  ens.stopped_at.reserve(static_cast<std::size_t>(ens.m_trajectories));
  for (int m = 0; m < ens.m_trajectories; ++m) {
    ens.stopped_at.push_back(get_f64(is));
    Configuration x = Configuration::zeros(ens.params.d, ens.params.n_particles);
    for (double& v : x.coords) v = get_f64(is);
    ens.terminal.push_back(std::move(x));
  }
  if (!is) throw std::runtime_error("truncated ensemble dump: " + path);
  // reconstruct the SimSpec fields the estimators rely on
  ens.spec.initial = InitialCondition::at(Configuration::zeros(ens.params.d, ens.params.n_particles));
  return ens;
}

}  // namespace io
}  // namespace kslab
