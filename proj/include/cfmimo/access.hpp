// SPDX-License-Identifier: Apache-2.0
//
// Competitive initial access and AP selection under the per-AP capacity of
// tau_p served UEs (one UE per pilot at every AP).

#pragma once

#include "cfmimo/linalg.hpp"

#include <cstdint>
#include <vector>

namespace cfmimo {

/// Serving relationships between APs and UEs.
///
/// `M[k]` lists the APs serving UE k, `D[l]` the UEs served by AP l, and
/// `P[k]` the UEs that share at least one serving AP with UE k (including k).
/// All index lists are sorted ascending.
struct ServiceMap {
  int L = 0;
  int K = 0;
  int tau_p = 0;
  std::vector<std::uint8_t> A;  // L x K, row-major, A[l * K + k]
  std::vector<std::vector<int>> M;
  std::vector<std::vector<int>> D;
  std::vector<std::vector<int>> P;

  bool serves(int l, int k) const { return A[static_cast<std::size_t>(l) * K + k] != 0; }

  /// Builds A, D and P from per-UE serving sets.
  static ServiceMap from_serving_sets(int L, int K, int tau_p,
                                     std::vector<std::vector<int>> serving);

  /// Throws std::logic_error if A, M, D, P are mutually inconsistent or if
  /// the capacity or coverage invariants fail.
  void check_invariants() const;
};

/// Competitive initial access (UEs processed in ascending index order).
///
/// Each UE repeatedly takes the strongest AP it has neither joined nor been
/// blacklisted from. An AP that exceeds tau_p served UEs drops its weakest
/// unprotected UE, which blacklists that AP. A UE whose blacklist reaches
/// L - 1 APs becomes protected: it can no longer be evicted and is forced onto
/// its one remaining AP.
///
/// Throws std::invalid_argument if K > L * tau_p and std::runtime_error if a
/// protected UE meets an AP whose incumbents are all protected. With
/// `allow_overload` the competition also runs when K > L * tau_p; some UEs
/// then end without a serving AP.
ServiceMap initial_access(const RMat& beta, int tau_p, bool allow_overload = false);

/// Benchmark selection: every AP serves its tau_p strongest UEs. Coverage is
/// not guaranteed, so `check_invariants` may fail on the result.
ServiceMap strongest_per_ap(const RMat& beta, int tau_p);

/// P[k] = { i : A[l][k] * A[l][i] != 0 for some l }.
std::vector<std::vector<int>> derive_interferer_sets(const ServiceMap& map);

}  // namespace cfmimo
