// SPDX-License-Identifier: Apache-2.0
//
// Pilot assignment: random, random switching, geography-based K-means,
// interference-based K-means and User-Group assignment.

#pragma once

#include "cfmimo/access.hpp"
#include "cfmimo/netgen.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cfmimo {

enum class PilotScheme { random, switching, gb_km, ib_km, user_group };

std::string to_string(PilotScheme s);
PilotScheme pilot_scheme_from_string(const std::string& s);

/// Pilot indices are zero-based: t[k] in [0, tau_p).
struct PilotPlan {
  int tau_p = 0;
  PilotScheme scheme = PilotScheme::random;
  bool switching = false;
  std::vector<int> t;
  std::vector<std::vector<int>> S;  // pilot-sharing UEs of k, including k
  // User-Group only: final threshold and the number of UE pairs placed in a
  // common group despite sharing a strongest serving AP (0 on clean success).
  double delta = 0.0;
  int constraint_violations = 0;

  static PilotPlan from_indices(int tau_p, PilotScheme scheme, std::vector<int> t,
                                bool switching = false);
  int K() const { return static_cast<int>(t.size()); }
  void check_invariants() const;
};

/// Squared distance between serving-masked AP distance vectors:
/// || diag(d_i) a_i - diag(d_k) a_k ||^2.
double dis_metric(std::span<const double> d_i, std::span<const double> a_i,
                  std::span<const double> d_k, std::span<const double> a_k);

/// Masked distance vector diag(d_k) A_{.k} for every UE (K x L).
RMat masked_distances(const NetworkRealization& net, const ServiceMap& map);

PilotPlan assign_random(int K, int tau_p, std::uint64_t seed);

/// One coherence block of random pilot switching; call with a fresh
/// `block_seed` per block.
PilotPlan assign_switching(int K, int tau_p, std::uint64_t block_seed);

struct KMeansOptions {
  int training_points = 0;  // 0 selects 10 * K
  double epsilon = 1e-3;
  int max_iterations = 100;
  std::uint64_t seed = 1;
};

/// Result of K-means training; exposed for tests and diagnostics.
struct ClusterState {
  RMat centroids;  // one row per centroid
  std::vector<std::vector<int>> clusters;
  int iterations = 0;
  bool converged = false;
};

/// Lloyd iterations over the rows of `points`, starting from `initial`.
/// Empty clusters are reseeded at the point farthest from its centroid.
ClusterState train_kmeans(const RMat& points, RMat initial, double epsilon, int max_iterations);

/// Splits UEs into ceil(K / tau_p) clusters (sequential admission of the
/// tau_p nearest remaining UEs per centroid) and pairs every non-reference
/// cluster with the reference cluster by largest mutual `dis`.
/// `features` rows are the UE feature vectors compared against `centroids`.
std::vector<int> cluster_and_share(const RMat& features, const RMat& centroids,
                                   const RMat& dis, int tau_p,
                                   std::vector<std::vector<int>>* clusters_out = nullptr);

PilotPlan assign_gb_km(const std::vector<Point>& ue_positions, double side_length, int tau_p,
                       const KMeansOptions& opts);

PilotPlan assign_ib_km(const NetworkRealization& net, const ServiceMap& map, int tau_p,
                       const KMeansOptions& opts);

/// Intermediate matrices of User-Group assignment for one threshold.
struct GroupingState {
  double delta = 0.0;
  std::vector<std::uint8_t> S;  // L x K row-major, strongest serving relations
  Eigen::MatrixXi T;            // K x K, S^T S
  std::vector<std::vector<int>> R;  // zero columns of T above the diagonal, per row
  std::vector<std::vector<int>> groups;
  int L = 0;
  int K = 0;
  bool s(int l, int k) const { return S[static_cast<std::size_t>(l) * K + k] != 0; }
};

/// Builds S, T and R for threshold `delta` and runs the greedy grouping.
GroupingState build_grouping(const RMat& beta, const ServiceMap& map, double delta);

/// Greedy grouping over R rows (group seed = lowest unassigned UE).
std::vector<std::vector<int>> group_users(const std::vector<std::vector<int>>& R, int K);

struct UserGroupOptions {
  std::optional<double> delta0;  // defaults to the reference table or 0.5
  int max_iterations = 50;
};

/// Reference initial thresholds for K = 40 (L in {121, 196}, tau_p in {4,6,8,10}).
std::optional<double> reference_initial_delta(int L, int tau_p);

PilotPlan assign_user_group(const RMat& beta, const ServiceMap& map, int tau_p,
                            const UserGroupOptions& opts = {});

struct ComplexityReport {
  PilotScheme scheme;
  double operations;
  std::string formula;
};

/// Online operation counts of each assignment scheme.
ComplexityReport online_complexity_report(PilotScheme scheme, int K, int L, int tau_p);

}  // namespace cfmimo
