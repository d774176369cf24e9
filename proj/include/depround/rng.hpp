#pragma once

#include <cstdint>
#include <random>
#include <vector>

// Randomness policy: every randomized routine in this library is driven by a
// 64-bit seed and std::mt19937_64 (whose output sequence is fixed by the
// standard). Independent streams for (experiment, run, method, trial) tuples
// are derived from one base seed with SplitMix64 mixing, so results are
// reproducible bit for bit and independent of scheduling.

namespace depround {

using Rng = std::mt19937_64;

// One SplitMix64 output step (Steele, Lea, Flood 2014). Used only to derive
// seeds, never as the sampling generator itself.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives a child seed from a base seed and a stream index.
constexpr std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(splitmix64(base) ^ splitmix64(stream ^ 0x6a09e667f3bcc909ULL));
}

constexpr std::uint64_t mix_seed(std::uint64_t base, std::uint64_t s0, std::uint64_t s1) {
  return mix_seed(mix_seed(base, s0), s1);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Uniform double in [0, 1) built from the top 53 bits, identical on every
// platform for a given seed.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

// Fisher-Yates permutation of {0, ..., n-1}.
inline std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

}  // namespace depround
