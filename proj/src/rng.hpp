#pragma once

#include <cstdint>
#include <random>

namespace coordsim {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Independent generator for replica `index` of a run seeded with `seed`.
// Streams are a pure function of (seed, index), so replicas may execute in
// any order or on any thread without changing results.
inline Rng replica_stream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  std::uint64_t c = splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
  return Rng(seq);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double exponential(Rng& rng, double rate) {
  return std::exponential_distribution<double>(1.0)(rng) / rate;
}

inline long long binomial(Rng& rng, long long n, double p) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  return std::binomial_distribution<long long>(n, p)(rng);
}

inline long long poisson(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  return std::poisson_distribution<long long>(mean)(rng);
}

inline double normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace coordsim
