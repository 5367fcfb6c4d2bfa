#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace soar {

// All randomness in the toolkit flows through these helpers so that a run is
// reproducible bit-for-bit from its master seed. Draws are stateless wrappers
// around std::mt19937_64 (no distribution objects, which may buffer state).

/// splitmix64 finalizer; good avalanche, used only for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent child seed from a master seed and a stream tag.
/// Changing one stream's consumption pattern never perturbs the others.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  return splitmix64(master ^ splitmix64(tag));
}

// Stream tags used across the toolkit.
inline constexpr std::uint64_t kStreamSpawn = 1;      // thermal spawning
inline constexpr std::uint64_t kStreamNoise = 2;      // wind noise process
inline constexpr std::uint64_t kStreamAgent = 3;      // exploration + tie-breaks
inline constexpr std::uint64_t kStreamObsNoise = 4;   // observation noise hook
inline constexpr std::uint64_t kStreamRolloutBase = 0x1000;  // + rollout index

using Rng = std::mt19937_64;

/// Uniform draw in [0, 1).
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform draw in [lo, hi].
inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in {0, ..., n-1} by rejection (unbiased).
inline int uniform_int(Rng& rng, int n) {
  const std::uint64_t bound = ~0ULL - ~0ULL % static_cast<std::uint64_t>(n);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= bound);
  return static_cast<int>(x % static_cast<std::uint64_t>(n));
}

/// Standard normal via Box-Muller. Consumes exactly two draws per call.
inline double standard_normal(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1], keeps log finite
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace soar
