#pragma once

#include <cstdint>

// Counter-based random streams: every variate is a pure function of
// (seed, trajectory, step, slot), so ensembles are bit-reproducible under any
// parallel schedule and trajectories/particles can be addressed independently.

namespace kslab {
namespace rng {

// splitmix64 finalizer; full-avalanche 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t key_hash(std::uint64_t seed, std::uint64_t trajectory,
                              std::uint64_t step, std::uint64_t slot) {
  constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t h = mix64(seed + kGolden);
  h = mix64(h ^ (trajectory + 2 * kGolden));
  h = mix64(h ^ (step + 3 * kGolden));
  h = mix64(h ^ (slot + 4 * kGolden));
  return h;
}

// Uniform in (0, 1]; never returns 0 so logs are safe.
inline double uniform(std::uint64_t seed, std::uint64_t trajectory, std::uint64_t step,
                      std::uint64_t slot) {
  return (static_cast<double>(key_hash(seed, trajectory, step, slot) >> 11) + 1.0) *
         0x1.0p-53;
}

// Step index reserved for drawing the initial condition.
constexpr std::uint64_t kInitialStep = ~std::uint64_t{0};

// Standard normal pair via Box-Muller; slots 2q and 2q+1 feed pair q.
struct NormalPair {
  double first;
  double second;
};
NormalPair normal_pair(std::uint64_t seed, std::uint64_t trajectory, std::uint64_t step,
                       std::uint64_t pair_slot);

// Fills `out[0..count)` with standard normals for one particle block.
// Slots are keyed per particle so that particle streams can be permuted
// independently of each other: particle i uses slots [2*d*i, 2*d*(i+1)).
void fill_block_normals(std::uint64_t seed, std::uint64_t trajectory, std::uint64_t step,
                        int particle, int d, double* out);

}  // namespace rng
}  // namespace kslab
