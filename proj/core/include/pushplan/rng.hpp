#pragma once

#include <cstdint>
#include <random>

namespace pushplan {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t mix_keys(uint64_t seed, uint64_t a, uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

/// RNG stream keyed by (seed, iteration, environment); identical keys give
/// identical streams regardless of worker scheduling.
inline std::mt19937_64 keyed_rng(uint64_t seed, uint64_t iteration, uint64_t env = 0) {
  return std::mt19937_64(mix_keys(seed, iteration, env));
}

}  // namespace pushplan
