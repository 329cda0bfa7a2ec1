#include "kslab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace kslab {

double sigmoid(double s) {
  if (s >= 0.0) {
    return 1.0 / (1.0 + std::exp(-s));
  }
  const double e = std::exp(s);
  return e / (1.0 + e);
}

namespace {

double simpson(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                            double fa, double fm, double fb, double whole, double tol,
                            int depth, int force) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(fa, flm, fm, a, m);
  const double right = simpson(fm, frm, fb, m, b);
  const double delta = left + right - whole;
  if (depth <= 0 || (force <= 0 && std::abs(delta) <= 15.0 * tol)) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1,
                              force - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1,
                              force - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth, int min_depth) {
  if (!(b >= a)) throw std::invalid_argument("adaptive_simpson: b < a");
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol,
                              max_depth, min_depth);
}

double golden_section_max(const std::function<double(double)>& f, double a, double b,
                          double tol_x) {
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol_x) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

double singular_cell_average(int m, double p, double width) {
  if (m < 2 || m > 3) throw std::invalid_argument("singular_cell_average: m must be 2 or 3");
  if (!(p < m)) throw std::invalid_argument("singular_cell_average: requires p < m");
  if (!(width > 0.0)) throw std::invalid_argument("singular_cell_average: width <= 0");
  // For the unit cube [-1,1]^m:  int |z|^{-p} dz = (2m/(m-p)) * int_{[-1,1]^{m-1}} (1+|w|^2)^{-p/2} dw,
  // from slicing the cube into ray cones through its faces.  Scaling by (width/2)
  // and dividing by width^m gives the cell average.
  double face;
  if (m == 2) {
    face = adaptive_simpson([p](double w) { return std::pow(1.0 + w * w, -0.5 * p); },
                            -1.0, 1.0, 1e-13);
  } else {
    face = adaptive_simpson(
        [p](double u) {
          return adaptive_simpson(
              [p, u](double v) { return std::pow(1.0 + u * u + v * v, -0.5 * p); }, -1.0,
              1.0, 1e-13);
        },
        -1.0, 1.0, 1e-12);
  }
  const double unit_integral = 2.0 * m / (m - p) * face;
  const double h = 0.5 * width;
  return unit_integral * std::pow(h, static_cast<double>(m) - p) /
         std::pow(width, static_cast<double>(m));
}

int default_thread_count() {
  if (const char* env = std::getenv("KSLAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)>& fn, int threads) {
  if (end <= begin) return;
  const std::int64_t count = end - begin;
  int nt = threads > 0 ? threads : default_thread_count();
  nt = static_cast<int>(std::min<std::int64_t>(nt, count));
  if (nt <= 1) {
    for (std::int64_t i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nt));
  std::exception_ptr first_error;
  std::mutex guard;
  for (int t = 0; t < nt; ++t) {
    const std::int64_t lo = begin + count * t / nt;
    const std::int64_t hi = begin + count * (t + 1) / nt;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::int64_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(guard);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

SampleStats sample_stats(const std::vector<double>& xs) {
  SampleStats s;
  s.count = xs.size();
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double v : xs) sum += v;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double v : xs) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    s.std_error = s.sd / std::sqrt(static_cast<double>(xs.size()));
  }
  return s;
}

}  // namespace kslab
