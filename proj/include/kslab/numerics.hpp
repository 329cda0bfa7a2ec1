#pragma once

#include <cstdint>
#include <functional>
#include <vector>

// Small shared numerical utilities: quadrature, 1-D maximization, stable
// logistic helpers and a deterministic thread partitioner.

namespace kslab {

// Numerically stable 1/(1+exp(-s)).
double sigmoid(double s);

// Adaptive Simpson on [a,b] with absolute tolerance `tol`.  `min_depth` forces
// that many subdivision levels before the error test may accept, so narrow
// features inside a wide interval are not missed by the first coarse panels.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 48, int min_depth = 0);

// Golden-section maximization of a unimodal f on [a,b]; returns argmax.
double golden_section_max(const std::function<double(double)>& f, double a, double b,
                          double tol_x);

// Average of |z|^{-p} over an m-dimensional cube of side `width` centred at the
// singular point z = 0 (requires p < m).  Used by grid quadratures of Hardy-type
// integrands: the cube integral reduces exactly to a smooth (m-1)-dimensional
// integral over a face, evaluated here by adaptive Simpson.
double singular_cell_average(int m, double p, double width);

// Runs fn(i) for i in [begin,end) on up to `threads` std::threads with a static
// block partition.  Results must be written to disjoint, preallocated slots.
// threads <= 0 selects KSLAB_THREADS from the environment, falling back to
// hardware concurrency.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)>& fn, int threads = 0);

int default_thread_count();

// Mean / (unbiased) standard deviation / standard error of a sample.
struct SampleStats {
  double mean = 0.0;
  double sd = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};
SampleStats sample_stats(const std::vector<double>& xs);

}  // namespace kslab
