#include "kslab/hardy_forms.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <mutex>
#include <stdexcept>

#include "kslab/numerics.hpp"
#include "kslab/rng.hpp"
#include "kslab/thresholds.hpp"

namespace kslab {

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place c2c transform; sign = FFTW_FORWARD or FFTW_BACKWARD (unnormalized).
void fft_inplace(std::vector<std::complex<double>>& data, int dim, int n, int sign) {
  std::vector<int> shape(static_cast<std::size_t>(dim), n);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft(dim, shape.data(), reinterpret_cast<fftw_complex*>(data.data()),
                         reinterpret_cast<fftw_complex*>(data.data()), sign,
                         FFTW_ESTIMATE);
  }
  if (!plan) throw std::runtime_error("fftw plan creation failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
}

std::vector<std::complex<double>> forward_fft(const GridFunction& f) {
  std::vector<std::complex<double>> data(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) data[i] = f.values[i];
  fft_inplace(data, f.dim, f.n, FFTW_FORWARD);
  return data;
}

// Odometer over grid/mode indices with an incrementally maintained sum of a
// per-axis quantity table[axis][digit].
template <typename Body>
void for_each_index_sum(int dim, int n, const std::vector<std::vector<double>>& table,
                        Body body) {
  std::vector<int> digit(static_cast<std::size_t>(dim), 0);
  double acc = 0.0;
  for (int a = 0; a < dim; ++a) acc += table[static_cast<std::size_t>(a)][0];
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(n);
  for (std::size_t lin = 0;; ++lin) {
    body(lin, acc, digit);
    if (lin + 1 == total) break;
    // increment the fastest-varying digit (last axis)
    for (int a = dim - 1; a >= 0; --a) {
      auto& d = digit[static_cast<std::size_t>(a)];
      acc -= table[static_cast<std::size_t>(a)][static_cast<std::size_t>(d)];
      if (++d < n) {
        acc += table[static_cast<std::size_t>(a)][static_cast<std::size_t>(d)];
        break;
      }
      d = 0;
      acc += table[static_cast<std::size_t>(a)][0];
    }
  }
}

std::vector<std::vector<double>> xi2_table(int dim, int n, double box) {
  std::vector<double> xi2(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const int k = j <= n / 2 ? j : j - n;
    const double xi = 2.0 * M_PI * k / box;
    xi2[static_cast<std::size_t>(j)] = xi * xi;
  }
  return std::vector<std::vector<double>>(static_cast<std::size_t>(dim), xi2);
}

double spectral_weighted_sum(const GridFunction& f, double power_of_xi2) {
  const auto data = forward_fft(f);
  const auto table = xi2_table(f.dim, f.n, f.box);
  double sum = 0.0;
  for_each_index_sum(f.dim, f.n, table,
                     [&](std::size_t lin, double xi2, const std::vector<int>&) {
                       if (xi2 > 0.0) {
                         sum += std::pow(xi2, power_of_xi2) * std::norm(data[lin]);
                       }
                     });
  const double norm = std::pow(f.box, f.dim) /
                      std::pow(static_cast<double>(f.size()), 2.0);
  return sum * norm;
}

double cell_volume(const GridFunction& f) {
  return std::pow(f.cell_width(), f.dim);
}

}  // namespace

GridFunction GridFunction::zeros(int dim, int n, double box) {
  GridFunction f;
  f.dim = dim;
  f.n = n;
  f.box = box;
  f.validate();
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(n);
  f.values.assign(total, 0.0);
  return f;
}

void GridFunction::validate() const {
  if (dim < 1 || dim > 6) throw std::invalid_argument("GridFunction: dim must be in [1,6]");
  if (n < 4 || n % 2 != 0) throw std::invalid_argument("GridFunction: n must be even, >= 4");
  if (!(box > 0.0)) throw std::invalid_argument("GridFunction: box must be > 0");
  if (!values.empty()) {
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(n);
    if (values.size() != total) {
      throw std::invalid_argument("GridFunction: values size != n^dim");
    }
  }
}

namespace {

// C-infinity ramp: 0 for u <= 0, 1 for u >= 1.
double smooth_ramp(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

}  // namespace

void apply_window(GridFunction& f, double margin) {
  f.validate();
  if (!(margin > 0.0 && margin < 1.0)) {
    throw std::invalid_argument("apply_window: margin must be in (0,1)");
  }
  const double half = 0.5 * f.box;
  std::vector<double> w1(static_cast<std::size_t>(f.n));
  for (int j = 0; j < f.n; ++j) {
    w1[static_cast<std::size_t>(j)] =
        smooth_ramp((half - std::abs(f.coord(j))) / (margin * half));
  }
  std::vector<int> digit(static_cast<std::size_t>(f.dim), 0);
  for (std::size_t lin = 0; lin < f.size(); ++lin) {
    double w = 1.0;
    for (int a = 0; a < f.dim; ++a) {
      w *= w1[static_cast<std::size_t>(digit[static_cast<std::size_t>(a)])];
    }
    f.values[lin] *= w;
    for (int a = f.dim - 1; a >= 0; --a) {
      auto& d = digit[static_cast<std::size_t>(a)];
      if (++d < f.n) break;
      d = 0;
    }
  }
}

GridFunction random_band_limited(int dim, int n, double box, int kmax,
                                 std::uint64_t seed, bool windowed) {
  if (kmax < 1 || kmax > n / 2 - 1) {
    throw std::invalid_argument("random_band_limited: kmax out of range");
  }
  GridFunction f = GridFunction::zeros(dim, n, box);
  std::vector<std::complex<double>> spec(f.size(), 0.0);
  // fill modes with |k|_inf <= kmax; taking the real part after the inverse
  // transform performs the Hermitian symmetrization.
  std::vector<int> digit(static_cast<std::size_t>(dim), 0);
  std::uint64_t mode_counter = 0;
  for (std::size_t lin = 0; lin < f.size(); ++lin) {
    bool in_band = true;
    int kinf = 0;
    for (int a = 0; a < dim; ++a) {
      const int j = digit[static_cast<std::size_t>(a)];
      const int k = j <= n / 2 ? j : j - n;
      kinf = std::max(kinf, std::abs(k));
      if (kinf > kmax) {
        in_band = false;
        break;
      }
    }
    if (in_band) {
      ++mode_counter;
      const double amp = 1.0 / (1.0 + static_cast<double>(kinf) * kinf);
      const rng::NormalPair z = rng::normal_pair(seed, mode_counter, 0, 0);
      spec[lin] = std::complex<double>(amp * z.first, amp * z.second);
    }
    for (int a = dim - 1; a >= 0; --a) {
      auto& d = digit[static_cast<std::size_t>(a)];
      if (++d < n) break;
      d = 0;
    }
  }
  fft_inplace(spec, dim, n, FFTW_BACKWARD);
  double max_abs = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    f.values[i] = spec[i].real();
    max_abs = std::max(max_abs, std::abs(f.values[i]));
  }
  if (max_abs > 0.0) {
    for (double& v : f.values) v /= max_abs;
  }
  if (windowed) apply_window(f);
  return f;
}

GridFunction radial_gaussian(int dim, int n, double box, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("radial_gaussian: a must be > 0");
  GridFunction f = GridFunction::zeros(dim, n, box);
  std::vector<std::vector<double>> x2(
      static_cast<std::size_t>(dim), std::vector<double>(static_cast<std::size_t>(n)));
  for (int j = 0; j < n; ++j) {
    const double c = f.coord(j);
    for (int ax = 0; ax < dim; ++ax) x2[static_cast<std::size_t>(ax)][static_cast<std::size_t>(j)] = c * c;
  }
  for_each_index_sum(dim, n, x2, [&](std::size_t lin, double r2, const std::vector<int>&) {
    f.values[lin] = std::exp(-a * r2);
  });
  return f;
}

double frac_laplacian_halfnorm(const GridFunction& f, double alpha) {
  f.validate();
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw std::domain_error("frac_laplacian_halfnorm: alpha must lie in (0,2]");
  }
  return spectral_weighted_sum(f, 0.5 * alpha);
}

double hardy_constant_2d(double alpha) {
  return std::pow(2.0, -alpha) * std::pow(gamma_fn(0.5 - 0.25 * alpha), 2.0) /
         std::pow(gamma_fn(0.5 + 0.25 * alpha), 2.0);
}

double hardy_ratio_2d(const GridFunction& f, double alpha) {
  f.validate();
  if (f.dim != 2) throw std::invalid_argument("hardy_ratio_2d: requires dim = 2");
  if (!(alpha >= 1.0 && alpha < 2.0)) {
    throw std::domain_error("hardy_ratio_2d: alpha must lie in [1,2)");
  }
  const double hc = f.cell_width();
  const double origin_avg = singular_cell_average(2, alpha, hc);
  std::vector<std::vector<double>> x2(2, std::vector<double>(static_cast<std::size_t>(f.n)));
  for (int j = 0; j < f.n; ++j) {
    const double c = f.coord(j);
    x2[0][static_cast<std::size_t>(j)] = c * c;
    x2[1][static_cast<std::size_t>(j)] = c * c;
  }
  double num = 0.0;
  bool any_nonzero = false;
  for_each_index_sum(2, f.n, x2, [&](std::size_t lin, double r2, const std::vector<int>&) {
    const double f2 = f.values[lin] * f.values[lin];
    if (f2 != 0.0) any_nonzero = true;
    const double w = r2 > 0.0 ? std::pow(r2, -0.5 * alpha) : origin_avg;
    num += f2 * w;
  });
  if (!any_nonzero) throw std::invalid_argument("hardy_ratio_2d: f vanishes identically");
  num *= hc * hc;
  const double den = frac_laplacian_halfnorm(f, alpha);
  return num / hardy_constant_2d(alpha) / den;
}

namespace {

// Enumerate grid points of a dN-dimensional grid exposing the coordinates;
// used by the pair-potential quadratures.
template <typename Body>
void for_each_grid_point(const GridFunction& f, Body body) {
  std::vector<int> digit(static_cast<std::size_t>(f.dim), 0);
  std::vector<double> x(static_cast<std::size_t>(f.dim));
  for (int a = 0; a < f.dim; ++a) x[static_cast<std::size_t>(a)] = f.coord(0);
  for (std::size_t lin = 0; lin < f.size(); ++lin) {
    body(lin, x);
    for (int a = f.dim - 1; a >= 0; --a) {
      auto& d = digit[static_cast<std::size_t>(a)];
      if (++d < f.n) {
        x[static_cast<std::size_t>(a)] = f.coord(d);
        break;
      }
      d = 0;
      x[static_cast<std::size_t>(a)] = f.coord(0);
    }
  }
}

}  // namespace

double many_particle_hardy_ratio(const GridFunction& f, int d, int n_particles) {
  f.validate();
  if (d < 3) {
    throw std::domain_error(
        "many_particle_hardy_ratio: no two-dimensional analogue (requires d >= 3)");
  }
  if (n_particles < 2 || f.dim != d * n_particles) {
    throw std::invalid_argument("many_particle_hardy_ratio: f.dim must equal d*N");
  }
  const double hc = f.cell_width();
  const double diag_avg = singular_cell_average(d, 2.0, hc);
  double num = 0.0;
  for_each_grid_point(f, [&](std::size_t lin, const std::vector<double>& x) {
    const double f2 = f.values[lin] * f.values[lin];
    if (f2 == 0.0) return;
    double w = 0.0;
    for (int i = 0; i < n_particles; ++i) {
      for (int j = i + 1; j < n_particles; ++j) {
        double r2 = 0.0;
        for (int c = 0; c < d; ++c) {
          const double dc = x[static_cast<std::size_t>(i * d + c)] -
                            x[static_cast<std::size_t>(j * d + c)];
          r2 += dc * dc;
        }
        w += r2 > 0.0 ? 1.0 / r2 : diag_avg;
      }
    }
    num += f2 * w;
  });
  num *= cell_volume(f) * (d - 2.0) * (d - 2.0) / n_particles;
  const double den = spectral_weighted_sum(f, 1.0);  // ||grad f||^2
  if (!(den > 0.0)) {
    throw std::invalid_argument(
        "many_particle_hardy_ratio: gradient vanishes (torus constant); window the "
        "test function");
  }
  return num / den;
}

FormBoundResult form_bound_ratio(const GridFunction& g, double alpha,
                                 const SystemParams& p) {
  g.validate();
  p.validate();
  if (g.dim != p.dim()) throw std::invalid_argument("form_bound_ratio: g.dim must equal dN");
  if (p.d == 2) {
    if (!(alpha >= 1.0 && alpha < 2.0)) {
      throw std::domain_error("form_bound_ratio: alpha must lie in [1,2) for d = 2");
    }
  } else if (!(alpha >= 1.0 && alpha <= 2.0)) {
    throw std::domain_error("form_bound_ratio: alpha must lie in [1,2] for d >= 3");
  }
  FormBoundResult out;
  if (p.nu == 0.0) return out;  // LHS vanishes identically
  out.delta = delta_form_bound(alpha, p);
  out.delta_admissible = out.delta < 1.0;

  const int n_part = p.n_particles, d = p.d;
  const double hc = g.cell_width();
  const double pair_pref = p.nu / n_part;
  // cell average of |w|^{-alpha} over a collision cell (eps = 0 path)
  const double coll_avg =
      p.epsilon == 0.0 ? singular_cell_average(d, alpha, hc) : 0.0;

  double num = 0.0;
  std::vector<double> r2(static_cast<std::size_t>(n_part * (n_part - 1) / 2));
  std::vector<double> majorant(static_cast<std::size_t>(n_part));
  Configuration scratch = Configuration::zeros(d, n_part);
  for_each_grid_point(g, [&](std::size_t lin, const std::vector<double>& x) {
    const double g2 = g.values[lin] * g.values[lin];
    if (g2 == 0.0) return;
    double babs_alpha;
    if (p.epsilon > 0.0) {
      std::copy(x.begin(), x.end(), scratch.coords.begin());
      const std::vector<double> b = drift_phi(scratch, p);
      double n2 = 0.0;
      for (double v : b) n2 += v * v;
      babs_alpha = std::pow(n2, 0.5 * alpha);
    } else {
      // majorant form |b^i| <= (nu/N) sum_j 1/r_ij; collision cells get the
      // exact cell average of the dominant pair term.
      std::size_t k = 0;
      for (int i = 0; i < n_part; ++i) {
        for (int j = i + 1; j < n_part; ++j, ++k) {
          double s = 0.0;
          for (int c = 0; c < d; ++c) {
            const double dc = x[static_cast<std::size_t>(i * d + c)] -
                              x[static_cast<std::size_t>(j * d + c)];
            s += dc * dc;
          }
          r2[k] = s;
        }
      }
      std::fill(majorant.begin(), majorant.end(), 0.0);
      double singular = 0.0;
      k = 0;
      for (int i = 0; i < n_part; ++i) {
        for (int j = i + 1; j < n_part; ++j, ++k) {
          if (r2[k] > 0.0) {
            const double inv = pair_pref / std::sqrt(r2[k]);
            majorant[static_cast<std::size_t>(i)] += inv;
            majorant[static_cast<std::size_t>(j)] += inv;
          } else {
            singular +=
                std::pow(std::sqrt(2.0) * pair_pref, alpha) * coll_avg;
          }
        }
      }
      double n2 = 0.0;
      for (double v : majorant) n2 += v * v;
      babs_alpha = std::pow(n2, 0.5 * alpha) + singular;
    }
    num += babs_alpha * g2;
  });
  num *= cell_volume(g);
  const double den = out.delta * frac_laplacian_halfnorm(g, alpha);
  if (!(den > 0.0)) throw std::invalid_argument("form_bound_ratio: g vanishes identically");
  out.ratio = num / den;
  return out;
}

SobolevResult weighted_sobolev_ratio(const GridFunction& u, const SystemParams& p) {
  u.validate();
  p.validate();
  if (p.d < 3) throw std::invalid_argument("weighted_sobolev_ratio: requires d >= 3");
  if (!(p.epsilon > 0.0)) {
    throw std::invalid_argument("weighted_sobolev_ratio: requires epsilon > 0");
  }
  if (u.dim != p.dim()) {
    throw std::invalid_argument("weighted_sobolev_ratio: u.dim must equal dN");
  }
  const double kappa = kappa_from_nu(p.nu, p.d);
  if (!(kappa < kappa_max_lemma(p.n_particles, p.d))) {
    throw std::invalid_argument("weighted_sobolev_ratio: kappa above the Sobolev threshold");
  }
  const int dim = u.dim, n_part = p.n_particles, d = p.d;
  const double dn = static_cast<double>(dim);
  const double l_exp = dn / (dn - 2.0);

  SobolevResult out;
  out.resolved = std::sqrt(p.epsilon) >= 0.5 * u.cell_width();

  // phi_eps on the grid
  std::vector<double> phi(u.size());
  const double exp_pref = -p.nu / (2.0 * n_part);
  for_each_grid_point(u, [&](std::size_t lin, const std::vector<double>& x) {
    double sum_log = 0.0;
    for (int i = 0; i < n_part; ++i) {
      for (int j = i + 1; j < n_part; ++j) {
        double r2 = 0.0;
        for (int c = 0; c < d; ++c) {
          const double dc = x[static_cast<std::size_t>(i * d + c)] -
                            x[static_cast<std::size_t>(j * d + c)];
          r2 += dc * dc;
        }
        sum_log += std::log(r2 + p.epsilon);
      }
    }
    phi[lin] = phi_eps_from_log(exp_pref * sum_log).value;
  });

  const double vol = cell_volume(u);
  double norm_acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    norm_acc += std::pow(std::abs(u.values[i]), 2.0 * l_exp) * phi[i];
  }
  out.norm_2l_sq = std::pow(norm_acc * vol, 1.0 / l_exp);

  // a[u,u] = <|grad u|^2 phi> with the spectral gradient, one axis at a time
  const auto spectrum = forward_fft(u);
  const double inv_total = 1.0 / static_cast<double>(u.size());
  std::vector<double> xi_axis(static_cast<std::size_t>(u.n));
  for (int j = 0; j < u.n; ++j) {
    const int k = j <= u.n / 2 ? j : j - u.n;
    xi_axis[static_cast<std::size_t>(j)] = 2.0 * M_PI * k / u.box;
  }
  // Nyquist mode of the first derivative is set to zero (its i*xi image is not
  // representable as a real field).
  double a_acc = 0.0;
  std::vector<std::complex<double>> work(u.size());
  for (int axis = 0; axis < dim; ++axis) {
    std::size_t stride = 1;
    for (int a = axis + 1; a < dim; ++a) stride *= static_cast<std::size_t>(u.n);
    for (std::size_t lin = 0; lin < u.size(); ++lin) {
      const int j = static_cast<int>((lin / stride) % static_cast<std::size_t>(u.n));
      double xi = xi_axis[static_cast<std::size_t>(j)];
      if (u.n % 2 == 0 && j == u.n / 2) xi = 0.0;
      const std::complex<double> v = spectrum[lin];
      work[lin] = std::complex<double>(-xi * v.imag(), xi * v.real());
    }
    fft_inplace(work, dim, u.n, FFTW_BACKWARD);
    for (std::size_t lin = 0; lin < u.size(); ++lin) {
      const double du = work[lin].real() * inv_total;
      a_acc += du * du * phi[lin];
    }
  }
  out.a_form = a_acc * vol;
  if (!(out.a_form > 0.0)) {
    throw std::invalid_argument("weighted_sobolev_ratio: u vanishes identically");
  }
  out.ratio = out.norm_2l_sq / out.a_form;
  return out;
}

// --- sharpness probe --------------------------------------------------------

namespace {

// Closed-form Gram matrices for radial Gaussians exp(-a|x|^2) on R^2:
//   num[j][k] = <g_j g_k |x|^{-alpha}>          = pi Gamma(1-alpha/2) S^{alpha/2-1}
//   den[j][k] = <(-Lap)^{a/4} g_j,(-Lap)^{a/4} g_k>
//             = (2pi)^{-2} (pi^2/(a_j a_k)) pi Gamma(1+alpha/2) B^{-1-alpha/2},
// with S = a_j+a_k and B = S/(4 a_j a_k).
double gram_num(double alpha, double aj, double ak) {
  return M_PI * gamma_fn(1.0 - 0.5 * alpha) * std::pow(aj + ak, 0.5 * alpha - 1.0);
}

double gram_den(double alpha, double aj, double ak) {
  const double b = (aj + ak) / (4.0 * aj * ak);
  return std::pow(2.0 * M_PI, -2.0) * (M_PI * M_PI / (aj * ak)) * M_PI *
         gamma_fn(1.0 + 0.5 * alpha) * std::pow(b, -1.0 - 0.5 * alpha);
}

// Cholesky factorization (lower) of a symmetric positive definite matrix.
bool cholesky(std::vector<double>& m, int k) {
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = m[static_cast<std::size_t>(i) * k + j];
      for (int q = 0; q < j; ++q) {
        s -= m[static_cast<std::size_t>(i) * k + q] * m[static_cast<std::size_t>(j) * k + q];
      }
      if (i == j) {
        if (!(s > 0.0)) return false;
        m[static_cast<std::size_t>(i) * k + j] = std::sqrt(s);
      } else {
        m[static_cast<std::size_t>(i) * k + j] = s / m[static_cast<std::size_t>(j) * k + j];
      }
    }
    for (int j = i + 1; j < k; ++j) m[static_cast<std::size_t>(i) * k + j] = 0.0;
  }
  return true;
}

// Largest eigenvalue/vector of a symmetric matrix by cyclic Jacobi sweeps.
void jacobi_max_eig(std::vector<double> m, int k, double& eig_out,
                    std::vector<double>& vec_out) {
  std::vector<double> v(static_cast<std::size_t>(k) * k, 0.0);
  for (int i = 0; i < k; ++i) v[static_cast<std::size_t>(i) * k + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) {
        off += std::abs(m[static_cast<std::size_t>(i) * k + j]);
      }
    }
    if (off < 1e-13) break;
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) {
        const double apq = m[static_cast<std::size_t>(i) * k + j];
        if (std::abs(apq) < 1e-300) continue;
        const double app = m[static_cast<std::size_t>(i) * k + i];
        const double aqq = m[static_cast<std::size_t>(j) * k + j];
        const double theta = 0.5 * (aqq - app) / apq;
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int q = 0; q < k; ++q) {
          const double mi = m[static_cast<std::size_t>(i) * k + q];
          const double mj = m[static_cast<std::size_t>(j) * k + q];
          m[static_cast<std::size_t>(i) * k + q] = c * mi - s * mj;
          m[static_cast<std::size_t>(j) * k + q] = s * mi + c * mj;
        }
        for (int q = 0; q < k; ++q) {
          const double mi = m[static_cast<std::size_t>(q) * k + i];
          const double mj = m[static_cast<std::size_t>(q) * k + j];
          m[static_cast<std::size_t>(q) * k + i] = c * mi - s * mj;
          m[static_cast<std::size_t>(q) * k + j] = s * mi + c * mj;
        }
        for (int q = 0; q < k; ++q) {
          const double vi = v[static_cast<std::size_t>(q) * k + i];
          const double vj = v[static_cast<std::size_t>(q) * k + j];
          v[static_cast<std::size_t>(q) * k + i] = c * vi - s * vj;
          v[static_cast<std::size_t>(q) * k + j] = s * vi + c * vj;
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i < k; ++i) {
    if (m[static_cast<std::size_t>(i) * k + i] > m[static_cast<std::size_t>(best) * k + best]) {
      best = i;
    }
  }
  eig_out = m[static_cast<std::size_t>(best) * k + best];
  vec_out.assign(static_cast<std::size_t>(k), 0.0);
  for (int q = 0; q < k; ++q) vec_out[static_cast<std::size_t>(q)] = v[static_cast<std::size_t>(q) * k + best];
}

}  // namespace

double gaussian_mixture_ratio_closed_form(double alpha, const std::vector<double>& a,
                                          const std::vector<double>& w) {
  if (a.size() != w.size() || a.empty()) {
    throw std::invalid_argument("gaussian_mixture_ratio_closed_form: size mismatch");
  }
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    for (std::size_t k = 0; k < a.size(); ++k) {
      num += w[j] * w[k] * gram_num(alpha, a[j], a[k]);
      den += w[j] * w[k] * gram_den(alpha, a[j], a[k]);
    }
  }
  return num / hardy_constant_2d(alpha) / den;
}

GridFunction gaussian_mixture_grid(int n, double box, const std::vector<double>& a,
                                   const std::vector<double>& w) {
  if (a.size() != w.size() || a.empty()) {
    throw std::invalid_argument("gaussian_mixture_grid: size mismatch");
  }
  GridFunction f = GridFunction::zeros(2, n, box);
  for (int j0 = 0; j0 < n; ++j0) {
    const double x0 = f.coord(j0);
    for (int j1 = 0; j1 < n; ++j1) {
      const double x1 = f.coord(j1);
      const double r2 = x0 * x0 + x1 * x1;
      double v = 0.0;
      for (std::size_t q = 0; q < a.size(); ++q) v += w[q] * std::exp(-a[q] * r2);
      f.values[static_cast<std::size_t>(j0) * n + j1] = v;
    }
  }
  return f;
}

SharpnessProbeResult hardy_sharpness_probe(double alpha, int k_scales, double a_min,
                                           double a_max) {
  if (!(alpha >= 1.0 && alpha < 2.0)) {
    throw std::domain_error("hardy_sharpness_probe: alpha must lie in [1,2)");
  }
  if (k_scales < 2 || !(0.0 < a_min && a_min < a_max)) {
    throw std::invalid_argument("hardy_sharpness_probe: bad scale range");
  }
  const int k = k_scales;
  SharpnessProbeResult out;
  out.scales.resize(static_cast<std::size_t>(k));
  const double step = std::log(a_max / a_min) / (k - 1);
  for (int j = 0; j < k; ++j) {
    out.scales[static_cast<std::size_t>(j)] = a_min * std::exp(step * j);
  }
  // scaled pencil: s_j = 1/sqrt(den_jj) keeps both matrices O(1)
  std::vector<double> s(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    s[static_cast<std::size_t>(j)] =
        1.0 / std::sqrt(gram_den(alpha, out.scales[static_cast<std::size_t>(j)],
                                 out.scales[static_cast<std::size_t>(j)]));
  }
  const double ch = hardy_constant_2d(alpha);
  std::vector<double> num(static_cast<std::size_t>(k) * k), den(num.size());
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double ai = out.scales[static_cast<std::size_t>(i)];
      const double aj = out.scales[static_cast<std::size_t>(j)];
      const double sij = s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(j)];
      num[static_cast<std::size_t>(i) * k + j] = sij * gram_num(alpha, ai, aj) / ch;
      den[static_cast<std::size_t>(i) * k + j] = sij * gram_den(alpha, ai, aj);
    }
  }
  // generalized eigenproblem via Cholesky reduction, with a ridge fallback for
  // the nearly-dependent wide-scale Gram matrix
  std::vector<double> l = den;
  double ridge = 0.0;
  for (int attempt = 0; attempt < 12 && !cholesky(l, k); ++attempt) {
    ridge = ridge == 0.0 ? 1e-14 : ridge * 10.0;
    l = den;
    for (int i = 0; i < k; ++i) l[static_cast<std::size_t>(i) * k + i] += ridge;
  }
  // C = L^{-1} num L^{-T}
  std::vector<double> c = num;
  // forward-substitute on the left: solve L * X = num (column-wise over rows)
  for (int col = 0; col < k; ++col) {
    for (int i = 0; i < k; ++i) {
      double v = c[static_cast<std::size_t>(i) * k + col];
      for (int q = 0; q < i; ++q) {
        v -= l[static_cast<std::size_t>(i) * k + q] * c[static_cast<std::size_t>(q) * k + col];
      }
      c[static_cast<std::size_t>(i) * k + col] = v / l[static_cast<std::size_t>(i) * k + i];
    }
  }
  // right: solve X * L^T = C  <=>  for each row, forward substitution again
  for (int row = 0; row < k; ++row) {
    for (int j = 0; j < k; ++j) {
      double v = c[static_cast<std::size_t>(row) * k + j];
      for (int q = 0; q < j; ++q) {
        v -= c[static_cast<std::size_t>(row) * k + q] * l[static_cast<std::size_t>(j) * k + q];
      }
      c[static_cast<std::size_t>(row) * k + j] = v / l[static_cast<std::size_t>(j) * k + j];
    }
  }
  double eig;
  std::vector<double> z;
  jacobi_max_eig(c, k, eig, z);
  out.sup_ratio = eig;
  // recover weights: w = S L^{-T} z
  std::vector<double> y(static_cast<std::size_t>(k));
  for (int i = k - 1; i >= 0; --i) {
    double v = z[static_cast<std::size_t>(i)];
    for (int q = i + 1; q < k; ++q) {
      v -= l[static_cast<std::size_t>(q) * k + i] * y[static_cast<std::size_t>(q)];
    }
    y[static_cast<std::size_t>(i)] = v / l[static_cast<std::size_t>(i) * k + i];
  }
  out.weights.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    out.weights[static_cast<std::size_t>(i)] = s[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
  }
  return out;
}

}  // namespace kslab
