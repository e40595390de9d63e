// SPDX-License-Identifier: Apache-2.0
//
// Shared instances for unit and acceptance tests.

#pragma once

#include "cfmimo/access.hpp"
#include "cfmimo/netgen.hpp"
#include "cfmimo/rng.hpp"

#include <functional>
#include <vector>

namespace cfmimo::testing {

/// 5 UEs and 9 APs with serving sets (1-based)
/// UE1 {1,2}, UE2 {2,3}, UE3 {4,5,6}, UE4 {6,7}, UE5 {5,7,8,9}.
/// With delta = 1 every serving pair is a strongest pair, so S = A and the
/// grouping is {UE1, UE3}, {UE2, UE4}, {UE5}.
inline std::vector<std::vector<int>> grouping_example_sets() {
  return {{0, 1}, {1, 2}, {3, 4, 5}, {5, 6}, {4, 6, 7, 8}};
}

inline ServiceMap grouping_example_map(int tau_p = 3) {
  return ServiceMap::from_serving_sets(9, 5, tau_p, grouping_example_sets());
}

/// Distinct positive gains; only their order matters for grouping.
inline RMat grouping_example_beta() {
  RMat beta(5, 9);
  for (int k = 0; k < 5; ++k)
    for (int l = 0; l < 9; ++l) beta(k, l) = 1e-6 * (1.0 + 0.01 * (9 * k + l));
  return beta;
}

inline NetworkConfig small_config(std::uint64_t seed, int L = 16, int K = 8, int N = 2) {
  NetworkConfig cfg;
  cfg.L = L;
  cfg.K = K;
  cfg.N = N;
  cfg.seed = seed;
  return cfg;
}

/// Random K x L gains spanning several decades.
inline RMat random_beta(int K, int L, std::uint64_t seed) {
  Rng rng(seed);
  RMat beta(K, L);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L; ++l) beta(k, l) = std::pow(10.0, rng.uniform(-12.0, -6.0));
  return beta;
}

/// Hand-built realization with correlation matrices from `corr(k, l)`.
inline NetworkRealization synthetic_network(int K, int L, int N, double noise,
                                            const std::function<CMat(int, int)>& corr) {
  NetworkRealization net;
  net.K = K;
  net.L = L;
  net.N = N;
  net.side_length = 500.0;
  net.noise_power = noise;
  net.ap_positions.resize(static_cast<std::size_t>(L));
  net.ue_positions.resize(static_cast<std::size_t>(K));
  net.beta.resize(K, L);
  net.distances = RMat::Constant(K, L, 10.0);
  net.R.resize(static_cast<std::size_t>(K) * L);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L; ++l) {
      net.R[static_cast<std::size_t>(k) * L + l] = corr(k, l);
      net.beta(k, l) = corr(k, l).trace().real() / N;
    }
  return net;
}

}  // namespace cfmimo::testing
