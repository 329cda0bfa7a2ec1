#include "kslab/rng.hpp"

#include <cmath>

namespace kslab {
namespace rng {

NormalPair normal_pair(std::uint64_t seed, std::uint64_t trajectory, std::uint64_t step,
                       std::uint64_t pair_slot) {
  const double u1 = uniform(seed, trajectory, step, 2 * pair_slot);
  const double u2 = uniform(seed, trajectory, step, 2 * pair_slot + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

void fill_block_normals(std::uint64_t seed, std::uint64_t trajectory, std::uint64_t step,
                        int particle, int d, double* out) {
  // particle i owns pair slots [i*d, i*d + ceil(d/2)); the ranges are disjoint.
  const std::uint64_t base = static_cast<std::uint64_t>(particle) * d;
  int c = 0;
  std::uint64_t q = 0;
  for (; c + 1 < d; c += 2, ++q) {
    const NormalPair z = normal_pair(seed, trajectory, step, base + q);
    out[c] = z.first;
    out[c + 1] = z.second;
  }
  if (c < d) {  // odd d: the last component burns a full pair
    out[c] = normal_pair(seed, trajectory, step, base + q).first;
  }
}

}  // namespace rng
}  // namespace kslab
