// SPDX-License-Identifier: Apache-2.0
//
// Seed derivation and random draws. Every stochastic stage derives its own
// stream from (base seed, stage tag, index...) so that any trial or drop can be
// regenerated in isolation, independent of execution order.

#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace cfmimo {

/// Stage tags mixed into derived seeds.
enum class Stream : std::uint64_t {
  ap_positions = 1,
  ue_positions = 2,
  shadowing = 3,
  channel = 4,
  pilot_noise = 5,
  pilot_plan = 6,
  kmeans = 7,
  drop = 8,
  switching_block = 9,
  decoding = 10,
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a child seed from a base seed and a sequence of indices.
inline std::uint64_t derive_seed(std::uint64_t base, Stream tag,
                                 std::initializer_list<std::uint64_t> idx = {}) {
  std::uint64_t h = mix64(base ^ mix64(static_cast<std::uint64_t>(tag)));
  for (std::uint64_t i : idx) h = mix64(h ^ mix64(i + 0x632be59bd9b4e019ULL));
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }

  double normal() { return normal_(engine_); }

  /// Standard circularly-symmetric complex Gaussian, E|z|^2 = 1.
  std::complex<double> complex_normal() {
    constexpr double s = 0.70710678118654752440;
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {s * re, s * im};
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace cfmimo
