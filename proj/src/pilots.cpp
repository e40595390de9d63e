// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/pilots.hpp"

#include "cfmimo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cfmimo {

std::string to_string(PilotScheme s) {
  switch (s) {
    case PilotScheme::random: return "random";
    case PilotScheme::switching: return "switching";
    case PilotScheme::gb_km: return "gb_km";
    case PilotScheme::ib_km: return "ib_km";
    case PilotScheme::user_group: return "user_group";
  }
  return "unknown";
}

PilotScheme pilot_scheme_from_string(const std::string& s) {
  if (s == "random") return PilotScheme::random;
  if (s == "switching" || s == "switch") return PilotScheme::switching;
  if (s == "gb_km" || s == "gb-km") return PilotScheme::gb_km;
  if (s == "ib_km" || s == "ib-km") return PilotScheme::ib_km;
  if (s == "user_group" || s == "user-group") return PilotScheme::user_group;
  throw std::invalid_argument("unknown pilot scheme: " + s);
}

PilotPlan PilotPlan::from_indices(int tau_p, PilotScheme scheme, std::vector<int> t,
                                  bool switching) {
  PilotPlan plan;
  plan.tau_p = tau_p;
  plan.scheme = scheme;
  plan.switching = switching;
  plan.t = std::move(t);
  const int K = plan.K();
  std::vector<std::vector<int>> by_pilot(static_cast<std::size_t>(tau_p));
  for (int k = 0; k < K; ++k) {
    const int p = plan.t[k];
    if (p < 0 || p >= tau_p) throw std::invalid_argument("pilot index out of range");
    by_pilot[p].push_back(k);
  }
  plan.S.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) plan.S[k] = by_pilot[plan.t[k]];
  return plan;
}

void PilotPlan::check_invariants() const {
  for (int k = 0; k < K(); ++k) {
    if (t[k] < 0 || t[k] >= tau_p) throw std::logic_error("pilot index out of range");
    const auto& s = S[k];
    if (!std::binary_search(s.begin(), s.end(), k)) throw std::logic_error("k not in S_k");
    for (int i : s)
      if (t[i] != t[k]) throw std::logic_error("S_k inconsistent with t");
  }
}

double dis_metric(std::span<const double> d_i, std::span<const double> a_i,
                  std::span<const double> d_k, std::span<const double> a_k) {
  if (d_i.size() != a_i.size() || d_k.size() != a_k.size() || d_i.size() != d_k.size())
    throw std::invalid_argument("dis_metric: length mismatch");
  double sum = 0.0;
  for (std::size_t l = 0; l < d_i.size(); ++l) {
    const double diff = d_i[l] * a_i[l] - d_k[l] * a_k[l];
    sum += diff * diff;
  }
  return sum;
}

RMat masked_distances(const NetworkRealization& net, const ServiceMap& map) {
  RMat x = RMat::Zero(net.K, net.L);
  for (int k = 0; k < net.K; ++k)
    for (int l : map.M[k]) x(k, l) = net.distances(k, l);
  return x;
}

PilotPlan assign_random(int K, int tau_p, std::uint64_t seed) {
  if (tau_p < 1) throw std::invalid_argument("tau_p must be >= 1");
  Rng rng(derive_seed(seed, Stream::pilot_plan));
  std::vector<int> t(static_cast<std::size_t>(K));
  for (auto& p : t) p = rng.uniform_int(0, tau_p - 1);
  return PilotPlan::from_indices(tau_p, PilotScheme::random, std::move(t));
}

PilotPlan assign_switching(int K, int tau_p, std::uint64_t block_seed) {
  if (tau_p < 1) throw std::invalid_argument("tau_p must be >= 1");
  Rng rng(derive_seed(block_seed, Stream::switching_block));
  std::vector<int> t(static_cast<std::size_t>(K));
  for (auto& p : t) p = rng.uniform_int(0, tau_p - 1);
  return PilotPlan::from_indices(tau_p, PilotScheme::switching, std::move(t), true);
}

// ---------------------------------------------------------------------------
// K-means pipelines

ClusterState train_kmeans(const RMat& points, RMat initial, double epsilon, int max_iterations) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  const Eigen::Index n = points.rows();
  const Eigen::Index m = initial.rows();
  if (n < 1 || m < 1) throw std::invalid_argument("train_kmeans: empty input");
  ClusterState st;
  st.centroids = std::move(initial);
  std::vector<int> label(static_cast<std::size_t>(n), 0);
  std::vector<double> dist2(static_cast<std::size_t>(n), 0.0);

  for (int it = 0; it < max_iterations; ++it) {
    for (Eigen::Index p = 0; p < n; ++p) {
      Eigen::Index best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < m; ++c) {
        const double d = (points.row(p) - st.centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      label[p] = static_cast<int>(best);
      dist2[p] = best_d;
    }
    RMat next = RMat::Zero(m, points.cols());
    std::vector<int> count(static_cast<std::size_t>(m), 0);
    for (Eigen::Index p = 0; p < n; ++p) {
      next.row(label[p]) += points.row(p);
      ++count[label[p]];
    }
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    for (Eigen::Index c = 0; c < m; ++c) {
      if (count[c] > 0) {
        next.row(c) /= count[c];
        continue;
      }
      Eigen::Index far = -1;
      for (Eigen::Index p = 0; p < n; ++p)
        if (!used[p] && (far < 0 || dist2[p] > dist2[far])) far = p;
      if (far < 0) far = 0;
      used[far] = 1;
      next.row(c) = points.row(far);
    }
    double shift = 0.0;
    for (Eigen::Index c = 0; c < m; ++c)
      shift = std::max(shift, (next.row(c) - st.centroids.row(c)).squaredNorm());
    st.centroids = std::move(next);
    st.iterations = it + 1;
    if (shift < epsilon) {
      st.converged = true;
      break;
    }
  }

  st.clusters.assign(static_cast<std::size_t>(m), {});
  for (Eigen::Index p = 0; p < n; ++p) {
    Eigen::Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < m; ++c) {
      const double d = (points.row(p) - st.centroids.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    st.clusters[best].push_back(static_cast<int>(p));
  }
  return st;
}

std::vector<int> cluster_and_share(const RMat& features, const RMat& centroids, const RMat& dis,
                                   int tau_p, std::vector<std::vector<int>>* clusters_out) {
  const int K = static_cast<int>(features.rows());
  const int n_clusters = static_cast<int>(centroids.rows());

  // Sequential admission: each centroid in turn takes the tau_p remaining UEs
  // nearest to it.
  std::vector<int> remaining(static_cast<std::size_t>(K));
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<std::vector<int>> clusters(static_cast<std::size_t>(n_clusters));
  for (int c = 0; c < n_clusters; ++c) {
    std::vector<double> cost(static_cast<std::size_t>(K), 0.0);
    for (int i : remaining) cost[i] = (features.row(i) - centroids.row(c)).squaredNorm();
    std::stable_sort(remaining.begin(), remaining.end(),
                     [&](int a, int b) { return cost[a] < cost[b]; });
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(tau_p), remaining.size());
    clusters[c].assign(remaining.begin(), remaining.begin() + static_cast<std::ptrdiff_t>(take));
    remaining.erase(remaining.begin(), remaining.begin() + static_cast<std::ptrdiff_t>(take));
    std::sort(remaining.begin(), remaining.end());
  }
  if (!remaining.empty()) throw std::logic_error("cluster_and_share: too few clusters");

  int ref = 0;
  for (int c = 0; c < n_clusters; ++c) {
    if (static_cast<int>(clusters[c].size()) == tau_p) {
      ref = c;
      break;
    }
    if (clusters[c].size() > clusters[ref].size()) ref = c;
  }

  std::vector<int> t(static_cast<std::size_t>(K), -1);
  std::vector<int> ref_members = clusters[ref];
  std::sort(ref_members.begin(), ref_members.end());
  for (std::size_t n = 0; n < ref_members.size(); ++n) t[ref_members[n]] = static_cast<int>(n);

  for (int c = 0; c < n_clusters; ++c) {
    if (c == ref) continue;
    std::vector<int> free_ref = ref_members;
    std::vector<int> open = clusters[c];
    std::sort(open.begin(), open.end());
    while (!open.empty()) {
      if (free_ref.empty()) throw std::logic_error("cluster_and_share: reference cluster exhausted");
      std::vector<std::vector<int>> claims(open.size());
      for (int k : free_ref) {
        std::size_t best = 0;
        for (std::size_t n = 1; n < open.size(); ++n)
          if (dis(open[n], k) > dis(open[best], k)) best = n;
        claims[best].push_back(k);
      }
      std::vector<int> still_open;
      for (std::size_t n = 0; n < open.size(); ++n) {
        const int i = open[n];
        if (claims[n].empty()) {
          still_open.push_back(i);
          continue;
        }
        int winner = claims[n].front();
        for (int k : claims[n])
          if (dis(i, k) > dis(i, winner)) winner = k;
        t[i] = t[winner];
        free_ref.erase(std::find(free_ref.begin(), free_ref.end(), winner));
      }
      open = std::move(still_open);
    }
  }
  if (clusters_out != nullptr) *clusters_out = std::move(clusters);
  return t;
}

namespace {

int cluster_count(int K, int tau_p) { return (K + tau_p - 1) / tau_p; }

RMat pairwise_squared_distances(const RMat& x) {
  const Eigen::Index n = x.rows();
  RMat d(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = (x.row(i) - x.row(j)).squaredNorm();
  return d;
}

int training_points(const KMeansOptions& opts, int K) {
  return opts.training_points > 0 ? opts.training_points : 10 * K;
}

}  // namespace

PilotPlan assign_gb_km(const std::vector<Point>& ue_positions, double side_length, int tau_p,
                       const KMeansOptions& opts) {
  const int K = static_cast<int>(ue_positions.size());
  if (tau_p < 1 || K < 1) throw std::invalid_argument("assign_gb_km: invalid sizes");
  Rng rng(derive_seed(opts.seed, Stream::kmeans));
  const int kp = training_points(opts, K);
  RMat points(kp, 2);
  for (int p = 0; p < kp; ++p) {
    points(p, 0) = rng.uniform(0.0, side_length);
    points(p, 1) = rng.uniform(0.0, side_length);
  }
  const int m = cluster_count(K, tau_p);
  RMat init(m, 2);
  for (int c = 0; c < m; ++c) {
    init(c, 0) = rng.uniform(0.0, side_length);
    init(c, 1) = rng.uniform(0.0, side_length);
  }
  ClusterState st = train_kmeans(points, std::move(init), opts.epsilon, opts.max_iterations);
  RMat features(K, 2);
  for (int k = 0; k < K; ++k) {
    features(k, 0) = ue_positions[k].x;
    features(k, 1) = ue_positions[k].y;
  }
  std::vector<int> t =
      cluster_and_share(features, st.centroids, pairwise_squared_distances(features), tau_p);
  return PilotPlan::from_indices(tau_p, PilotScheme::gb_km, std::move(t));
}

PilotPlan assign_ib_km(const NetworkRealization& net, const ServiceMap& map, int tau_p,
                       const KMeansOptions& opts) {
  const int K = net.K;
  if (tau_p < 1) throw std::invalid_argument("assign_ib_km: tau_p must be >= 1");
  Rng rng(derive_seed(opts.seed, Stream::kmeans));
  const int kp = training_points(opts, K);
  RMat points(kp, net.L);
  for (int p = 0; p < kp; ++p) {
    const Point pt{rng.uniform(0.0, net.side_length), rng.uniform(0.0, net.side_length)};
    points.row(p) = ap_distance_vector(pt, net.ap_positions, net.side_length).transpose();
  }
  const int m = cluster_count(K, tau_p);
  RMat init(m, net.L);
  for (int c = 0; c < m; ++c) {
    const Point pt{rng.uniform(0.0, net.side_length), rng.uniform(0.0, net.side_length)};
    init.row(c) = ap_distance_vector(pt, net.ap_positions, net.side_length).transpose();
  }
  ClusterState st = train_kmeans(points, std::move(init), opts.epsilon, opts.max_iterations);
  const RMat features = masked_distances(net, map);
  std::vector<int> t =
      cluster_and_share(features, st.centroids, pairwise_squared_distances(features), tau_p);
  return PilotPlan::from_indices(tau_p, PilotScheme::ib_km, std::move(t));
}

// ---------------------------------------------------------------------------
// User-Group

GroupingState build_grouping(const RMat& beta, const ServiceMap& map, double delta) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must be in [0, 1]");
  GroupingState st;
  st.delta = delta;
  st.L = map.L;
  st.K = map.K;
  struct Pair {
    int k;
    int l;
  };
  std::vector<Pair> served;
  for (int k = 0; k < map.K; ++k)
    for (int l : map.M[k]) served.push_back({k, l});
  std::stable_sort(served.begin(), served.end(),
                   [&](const Pair& a, const Pair& b) { return beta(a.k, a.l) > beta(b.k, b.l); });
  const double want = delta * static_cast<double>(served.size());
  const auto keep = static_cast<std::size_t>(std::ceil(want - 1e-9));
  st.S.assign(static_cast<std::size_t>(map.L) * map.K, 0);
  std::vector<std::vector<int>> strongest(static_cast<std::size_t>(map.K));
  for (std::size_t n = 0; n < std::min(keep, served.size()); ++n) {
    st.S[static_cast<std::size_t>(served[n].l) * map.K + served[n].k] = 1;
    strongest[served[n].k].push_back(served[n].l);
  }

  st.T = Eigen::MatrixXi::Zero(map.K, map.K);
  for (int l = 0; l < map.L; ++l) {
    std::vector<int> col;
    for (int k = 0; k < map.K; ++k)
      if (st.s(l, k)) col.push_back(k);
    for (int i : col)
      for (int j : col) ++st.T(i, j);
  }
  st.R.assign(static_cast<std::size_t>(map.K), {});
  for (int i = 0; i < map.K; ++i)
    for (int j = i + 1; j < map.K; ++j)
      if (st.T(i, j) == 0) st.R[i].push_back(j);
  st.groups = group_users(st.R, map.K);
  return st;
}

std::vector<std::vector<int>> group_users(const std::vector<std::vector<int>>& R, int K) {
  std::vector<char> available(static_cast<std::size_t>(K), 1);
  std::vector<std::vector<int>> groups;
  auto filter = [&](const std::vector<int>& v) {
    std::vector<int> out;
    for (int j : v)
      if (available[j]) out.push_back(j);
    return out;
  };
  for (int seed = 0; seed < K; ++seed) {
    if (!available[seed]) continue;
    std::vector<int> group{seed};
    available[seed] = 0;
    std::vector<int> candidates = filter(R[seed]);
    while (!candidates.empty()) {
      const int j = candidates.front();
      group.push_back(j);
      available[j] = 0;
      std::vector<int> next;
      std::set_intersection(candidates.begin(), candidates.end(), R[j].begin(), R[j].end(),
                            std::back_inserter(next));
      candidates = filter(next);
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

std::optional<double> reference_initial_delta(int L, int tau_p) {
  static constexpr int kTaus[] = {4, 6, 8, 10};
  static constexpr double kL121[] = {0.24, 0.27, 0.30, 0.32};
  static constexpr double kL196[] = {0.21, 0.23, 0.25, 0.27};
  for (int n = 0; n < 4; ++n) {
    if (kTaus[n] != tau_p) continue;
    if (L == 121) return kL121[n];
    if (L == 196) return kL196[n];
  }
  return std::nullopt;
}

namespace {

int conflicting_pairs(const Eigen::MatrixXi& T, const std::vector<int>& a,
                      const std::vector<int>& b) {
  int n = 0;
  for (int i : a)
    for (int j : b)
      if (T(i, j) > 0) ++n;
  return n;
}

int count_violations(const Eigen::MatrixXi& T, const std::vector<std::vector<int>>& groups) {
  int n = 0;
  for (const auto& g : groups)
    for (std::size_t x = 0; x < g.size(); ++x)
      for (std::size_t y = x + 1; y < g.size(); ++y)
        if (T(g[x], g[y]) > 0) ++n;
  return n;
}

void merge_down(const Eigen::MatrixXi& T, std::vector<std::vector<int>>& groups, int target) {
  while (static_cast<int>(groups.size()) > target) {
    std::size_t ba = 0;
    std::size_t bb = 1;
    int best = std::numeric_limits<int>::max();
    for (std::size_t a = 0; a < groups.size(); ++a) {
      for (std::size_t b = a + 1; b < groups.size(); ++b) {
        const int c = conflicting_pairs(T, groups[a], groups[b]);
        if (c < best) {
          best = c;
          ba = a;
          bb = b;
        }
      }
    }
    groups[ba].insert(groups[ba].end(), groups[bb].begin(), groups[bb].end());
    std::sort(groups[ba].begin(), groups[ba].end());
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(bb));
  }
}

void split_up(std::vector<std::vector<int>>& groups, int target) {
  while (static_cast<int>(groups.size()) < target) {
    std::size_t largest = 0;
    for (std::size_t g = 1; g < groups.size(); ++g)
      if (groups[g].size() > groups[largest].size()) largest = g;
    if (groups[largest].size() < 2) break;
    const int moved = groups[largest].back();
    groups[largest].pop_back();
    groups.push_back({moved});
  }
}

}  // namespace

PilotPlan assign_user_group(const RMat& beta, const ServiceMap& map, int tau_p,
                            const UserGroupOptions& opts) {
  if (tau_p < 1) throw std::invalid_argument("tau_p must be >= 1");
  double delta = opts.delta0.value_or(reference_initial_delta(map.L, tau_p).value_or(0.5));
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta0 must be in (0, 1]");
  double lo = 0.0;
  double hi = 1.0;

  std::optional<GroupingState> over;   // fewest groups above tau_p
  std::optional<GroupingState> under;  // most groups below tau_p
  std::optional<GroupingState> exact;
  for (int it = 0; it < opts.max_iterations; ++it) {
    GroupingState st = build_grouping(beta, map, delta);
    const int m = static_cast<int>(st.groups.size());
    if (m == tau_p) {
      exact = std::move(st);
      break;
    }
    if (m < tau_p) {
      lo = delta;
      if (!under || m > static_cast<int>(under->groups.size())) under = std::move(st);
    } else {
      hi = delta;
      if (!over || m <= static_cast<int>(over->groups.size())) over = std::move(st);
    }
    delta = 0.5 * (lo + hi);
  }

  GroupingState st;
  if (exact) {
    st = std::move(*exact);
  } else if (over) {
    st = std::move(*over);
    merge_down(st.T, st.groups, tau_p);
  } else {
    st = std::move(*under);
    split_up(st.groups, tau_p);
  }

  std::vector<int> t(static_cast<std::size_t>(map.K), 0);
  for (std::size_t g = 0; g < st.groups.size(); ++g)
    for (int k : st.groups[g]) t[k] = static_cast<int>(g);
  PilotPlan plan = PilotPlan::from_indices(tau_p, PilotScheme::user_group, std::move(t));
  plan.delta = st.delta;
  plan.constraint_violations = count_violations(st.T, st.groups);
  return plan;
}

ComplexityReport online_complexity_report(PilotScheme scheme, int K, int L, int tau_p) {
  const double k = K;
  const double l = L;
  const double tp = tau_p;
  switch (scheme) {
    case PilotScheme::random:
    case PilotScheme::switching:
      return {scheme, k, "K"};
    case PilotScheme::gb_km:
    case PilotScheme::ib_km: {
      const double clusters = std::ceil(k / tp);
      return {scheme, k * k / tp + tp * tp * (clusters - 1.0),
              "K^2/tau_p + tau_p^2 (ceil(K/tau_p) - 1)"};
    }
    case PilotScheme::user_group:
      return {scheme, k * l + k * k * l + k / 2.0, "KL + K^2 L + K/2"};
  }
  throw std::invalid_argument("unknown scheme");
}

}  // namespace cfmimo
