// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/access.hpp"
#include "cfmimo/pilots.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

using namespace cfmimo;

namespace {

void check_plan(const PilotPlan& plan, int K, int tau_p) {
  CHECK(plan.K() == K);
  CHECK(plan.tau_p == tau_p);
  CHECK_NOTHROW(plan.check_invariants());
}

std::vector<int> pilot_usage(const PilotPlan& plan) {
  std::vector<int> n(static_cast<std::size_t>(plan.tau_p), 0);
  for (int t : plan.t) ++n[t];
  return n;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dis metric

TEST_CASE("Dis metric on the two-AP-pair example") {
  const std::array<double, 4> d1{75, 50, 70, 45}, a1{0, 1, 0, 1};
  const std::array<double, 4> d2{45, 60, 55, 65}, a2{1, 0, 1, 0};
  const std::array<double, 4> d3{65, 60, 55, 50}, a3{0, 1, 1, 1};
  const double dis12 = dis_metric(d1, a1, d2, a2);
  const double dis13 = dis_metric(d1, a1, d3, a3);
  CHECK(dis12 == doctest::Approx(45 * 45 + 50 * 50 + 55 * 55 + 45 * 45));
  CHECK(dis12 == doctest::Approx(9575));
  CHECK(dis13 == doctest::Approx(3150));
  CHECK(dis12 > dis13);
}

TEST_CASE("Dis metric is symmetric and zero only for identical masked vectors") {
  Rng rng(3);
  for (int n = 0; n < 100; ++n) {
    std::vector<double> d1(6), a1(6), d2(6), a2(6);
    for (int l = 0; l < 6; ++l) {
      d1[l] = rng.uniform(1, 400);
      d2[l] = rng.uniform(1, 400);
      a1[l] = rng.uniform_int(0, 1);
      a2[l] = rng.uniform_int(0, 1);
    }
    CHECK(dis_metric(d1, a1, d2, a2) == doctest::Approx(dis_metric(d2, a2, d1, a1)));
    CHECK(dis_metric(d1, a1, d1, a1) == 0.0);
    if (a1 != a2) CHECK(dis_metric(d1, a1, d2, a2) > 0.0);
  }
  const std::vector<double> d{1, 2}, a{1, 0};
  CHECK_THROWS_AS(dis_metric(d, a, std::vector<double>{1}, std::vector<double>{1}),
                  std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Random and switching

TEST_CASE("a single pilot is shared by everyone") {
  const auto plan = assign_random(6, 1, 4);
  check_plan(plan, 6, 1);
  for (int k = 0; k < 6; ++k) CHECK(plan.S[k].size() == 6);
  const auto sw = assign_switching(6, 1, 4);
  CHECK(sw.switching);
  for (int k = 0; k < 6; ++k) CHECK(sw.S[k].size() == 6);
}

TEST_CASE("random assignment is deterministic per seed") {
  CHECK(assign_random(30, 10, 5).t == assign_random(30, 10, 5).t);
  CHECK(assign_random(30, 10, 5).t != assign_random(30, 10, 6).t);
  CHECK_FALSE(assign_random(30, 10, 5).switching);
}

TEST_CASE("random collisions follow birthday statistics") {
  // P(no collision) for 5 UEs on 10 pilots = 10 9 8 7 6 / 10^5.
  const double want = 10.0 * 9 * 8 * 7 * 6 / 1e5;
  const int runs = 4000;
  int clean = 0;
  for (int s = 0; s < runs; ++s) {
    const auto plan = assign_random(5, 10, static_cast<std::uint64_t>(s));
    const std::set<int> used(plan.t.begin(), plan.t.end());
    clean += used.size() == 5 ? 1 : 0;
  }
  CHECK(static_cast<double>(clean) / runs == doctest::Approx(want).epsilon(0.1));
}

TEST_CASE("switching blocks share a pilot with probability 1 / tau_p") {
  const int tau_p = 4;
  const int blocks = 100000;
  int hits = 0;
  for (int b = 0; b < blocks; ++b) {
    const auto plan = assign_switching(3, tau_p, static_cast<std::uint64_t>(b));
    hits += plan.t[0] == plan.t[1] ? 1 : 0;
  }
  CHECK(std::abs(static_cast<double>(hits) / blocks - 1.0 / tau_p) < 0.01);
}

TEST_CASE("distinct block seeds repeat a plan with probability tau_p^-K") {
  const int runs = 4000;
  int same = 0;
  for (int s = 0; s < runs; ++s) {
    const auto a = assign_switching(3, 2, static_cast<std::uint64_t>(2 * s));
    const auto b = assign_switching(3, 2, static_cast<std::uint64_t>(2 * s + 1));
    same += a.t == b.t ? 1 : 0;
  }
  CHECK(static_cast<double>(same) / runs == doctest::Approx(0.125).epsilon(0.15));
}

TEST_CASE("plans reject out-of-range pilots") {
  CHECK_THROWS_AS(PilotPlan::from_indices(2, PilotScheme::random, {0, 2}), std::invalid_argument);
  CHECK_THROWS_AS(assign_random(3, 0, 1), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// K-means pipelines

TEST_CASE("K-means training terminates with disjoint covering clusters") {
  Rng rng(2);
  RMat pts(300, 2);
  for (int p = 0; p < 300; ++p) {
    pts(p, 0) = rng.uniform(0, 500);
    pts(p, 1) = rng.uniform(0, 500);
  }
  RMat init = pts.topRows(5);
  const auto st = train_kmeans(pts, init, 1e-3, 100);
  CHECK(st.iterations <= 100);
  std::vector<int> seen;
  for (const auto& c : st.clusters) seen.insert(seen.end(), c.begin(), c.end());
  std::sort(seen.begin(), seen.end());
  CHECK(seen.size() == 300);
  CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
  CHECK_THROWS_AS(train_kmeans(pts, init, 0.0, 10), std::invalid_argument);
}

TEST_CASE("GB-KM with K = tau_p gives orthogonal pilots") {
  const auto net = generate_network(testing::small_config(3, 16, 6, 1));
  KMeansOptions opts;
  opts.seed = 9;
  const auto plan = assign_gb_km(net.ue_positions, net.side_length, 6, opts);
  check_plan(plan, 6, 6);
  for (int n : pilot_usage(plan)) CHECK(n == 1);
}

TEST_CASE("GB-KM clusters two separated blobs into pilot-disjoint halves") {
  const int tau_p = 5;
  std::vector<Point> ues;
  Rng rng(8);
  for (int k = 0; k < tau_p; ++k) ues.push_back({100 + rng.uniform(-5, 5), 100 + rng.uniform(-5, 5)});
  for (int k = 0; k < tau_p; ++k) ues.push_back({400 + rng.uniform(-5, 5), 400 + rng.uniform(-5, 5)});
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    KMeansOptions opts;
    opts.seed = seed;
    const auto plan = assign_gb_km(ues, 500.0, tau_p, opts);
    check_plan(plan, 2 * tau_p, tau_p);
    // Each blob uses every pilot once, so every pilot pairs one UE per blob.
    std::set<int> first(plan.t.begin(), plan.t.begin() + tau_p);
    std::set<int> second(plan.t.begin() + tau_p, plan.t.end());
    CHECK(first.size() == static_cast<std::size_t>(tau_p));
    CHECK(second.size() == static_cast<std::size_t>(tau_p));
  }
}

TEST_CASE("GB-KM is deterministic per seed") {
  const auto net = generate_network(testing::small_config(4, 16, 20, 1));
  KMeansOptions opts;
  opts.seed = 5;
  CHECK(assign_gb_km(net.ue_positions, 500, 4, opts).t ==
        assign_gb_km(net.ue_positions, 500, 4, opts).t);
}

TEST_CASE("IB-KM with K = tau_p gives orthogonal pilots") {
  const auto net = generate_network(testing::small_config(5, 16, 4, 1));
  const auto map = initial_access(net.beta, 4);
  const auto plan = assign_ib_km(net, map, 4, KMeansOptions{});
  check_plan(plan, 4, 4);
  for (int n : pilot_usage(plan)) CHECK(n == 1);
}

TEST_CASE("IB-KM balances pilot reuse in degenerate geometry") {
  const int K = 13;
  const int tau_p = 4;
  const auto net = testing::synthetic_network(K, 4, 1, 1e-13, [](int, int) {
    return CMat(CMat::Constant(1, 1, 1e-8));
  });
  const auto map = initial_access(net.beta, tau_p);
  const auto plan = assign_ib_km(net, map, tau_p, KMeansOptions{});
  check_plan(plan, K, tau_p);
  for (int n : pilot_usage(plan)) CHECK((n == 3 || n == 4));
}

TEST_CASE("IB-KM never reuses a pilot inside one cluster") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto net = generate_network(testing::small_config(seed, 25, 40, 1));
    const auto map = initial_access(net.beta, 5);
    const RMat features = masked_distances(net, map);
    RMat centroids = features.topRows(8);
    RMat dis(40, 40);
    for (int i = 0; i < 40; ++i)
      for (int j = 0; j < 40; ++j) dis(i, j) = (features.row(i) - features.row(j)).squaredNorm();
    std::vector<std::vector<int>> clusters;
    const auto t = cluster_and_share(features, centroids, dis, 5, &clusters);
    for (const auto& c : clusters) {
      CHECK(static_cast<int>(c.size()) <= 5);
      std::set<int> used;
      for (int k : c) used.insert(t[k]);
      CHECK(used.size() == c.size());
    }
  }
}

TEST_CASE("cross-cluster pairing keeps the strongest Dis edge") {
  // Oracle: enumerate both pairings of {0,1} with {2,3}; the claim-and-resolve
  // rule must pick the pairing that contains the globally largest Dis edge.
  RMat features(4, 1);
  features << 0.0, 0.1, 10.0, 10.1;
  RMat centroids(2, 1);
  centroids << 0.0, 10.0;
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    RMat dis = RMat::Zero(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) dis(i, j) = dis(j, i) = rng.uniform(0, 1);
    const auto t = cluster_and_share(features, centroids, dis, 2);
    CHECK(t[0] == 0);
    CHECK(t[1] == 1);
    const std::array<std::array<int, 2>, 2> pairings{{{2, 3}, {3, 2}}};  // partner of 0, 1
    int best_edge_owner = -1;
    double best = -1.0;
    for (int p = 0; p < 2; ++p)
      for (int r = 0; r < 2; ++r)
        if (dis(r, pairings[p][r]) > best) {
          best = dis(r, pairings[p][r]);
          best_edge_owner = p;
        }
    const auto& want = pairings[best_edge_owner];
    CHECK(t[want[0]] == 0);
    CHECK(t[want[1]] == 1);
  }
}

// ---------------------------------------------------------------------------
// User-Group

TEST_CASE("grouping example reproduces S, T and the groups") {
  const auto map = testing::grouping_example_map();
  const RMat beta = testing::grouping_example_beta();
  const auto st = build_grouping(beta, map, 1.0);
  const auto sets = testing::grouping_example_sets();
  for (int k = 0; k < 5; ++k)
    for (int l = 0; l < 9; ++l)
      CHECK(st.s(l, k) == std::binary_search(sets[k].begin(), sets[k].end(), l));
  Eigen::MatrixXi T(5, 5);
  T << 2, 1, 0, 0, 0,  //
      1, 2, 0, 0, 0,   //
      0, 0, 3, 1, 1,   //
      0, 0, 1, 2, 1,   //
      0, 0, 1, 1, 4;
  CHECK(st.T == T);
  CHECK(st.R[0] == std::vector<int>{2, 3, 4});
  CHECK(st.R[1] == std::vector<int>{2, 3, 4});
  CHECK(st.R[2].empty());
  CHECK(st.R[3].empty());
  CHECK(st.R[4].empty());
  const std::vector<std::vector<int>> groups{{0, 2}, {1, 3}, {4}};
  CHECK(st.groups == groups);

  UserGroupOptions opts;
  opts.delta0 = 1.0;
  const auto plan = assign_user_group(beta, map, 3, opts);
  CHECK(plan.t == std::vector<int>{0, 1, 0, 1, 2});
  CHECK(plan.constraint_violations == 0);
  CHECK(plan.delta == 1.0);
}

TEST_CASE("grouping endpoints in delta") {
  // Every UE on AP 0: delta = 1 isolates everyone.
  const auto map = ServiceMap::from_serving_sets(3, 4, 4, {{0, 1}, {0}, {0, 2}, {0}});
  const RMat beta = testing::random_beta(4, 3, 2);
  CHECK(build_grouping(beta, map, 1.0).groups.size() == 4);
  // A single strongest pair leaves T almost empty: one group.
  CHECK(build_grouping(beta, map, 1e-6).groups.size() == 1);
  CHECK_THROWS_AS(build_grouping(beta, map, 1.5), std::invalid_argument);
}

TEST_CASE("T is symmetric and nonnegative") {
  const auto net = generate_network(testing::small_config(2, 25, 30, 1));
  const auto map = initial_access(net.beta, 5);
  const auto st = build_grouping(net.beta, map, 0.4);
  CHECK(st.T == st.T.transpose());
  CHECK(st.T.minCoeff() >= 0);
}

TEST_CASE("User-Group plans satisfy the disjointness constraint") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    NetworkConfig cfg = testing::small_config(seed, 100, 50, 1);
    const auto net = generate_network(cfg);
    const auto map = initial_access(net.beta, 10);
    const auto plan = assign_user_group(net.beta, map, 10);
    check_plan(plan, 50, 10);
    std::set<int> used(plan.t.begin(), plan.t.end());
    CHECK(used.size() == 10);
    const auto st = build_grouping(net.beta, map, plan.delta);
    int violations = 0;
    for (int i = 0; i < 50; ++i)
      for (int j = i + 1; j < 50; ++j)
        if (plan.t[i] == plan.t[j] && st.T(i, j) > 0) ++violations;
    CHECK(violations == plan.constraint_violations);
  }
}

TEST_CASE("greedy grouping uses running intersections") {
  // R_0 = {1, 2, 3}; 1 and 2 conflict, so 0 groups with 1 and 3.
  const std::vector<std::vector<int>> R{{1, 2, 3}, {3}, {3}, {}};
  const std::vector<std::vector<int>> want{{0, 1, 3}, {2}};
  CHECK(group_users(R, 4) == want);
}

TEST_CASE("reference initial delta table") {
  CHECK(reference_initial_delta(121, 10).value() == doctest::Approx(0.32));
  CHECK(reference_initial_delta(196, 4).value() == doctest::Approx(0.21));
  CHECK_FALSE(reference_initial_delta(100, 10).has_value());
}

// ---------------------------------------------------------------------------
// Online complexity

TEST_CASE("online complexity counts") {
  CHECK(online_complexity_report(PilotScheme::ib_km, 50, 100, 10).operations == 650.0);
  CHECK(online_complexity_report(PilotScheme::random, 50, 100, 10).operations == 50.0);
  CHECK(online_complexity_report(PilotScheme::user_group, 50, 100, 10).operations ==
        50.0 * 100 + 2500.0 * 100 + 25.0);
  for (int K = 10; K <= 200; K += 10)
    for (int tau_p = 1; tau_p <= K / 2; ++tau_p)
      CHECK(online_complexity_report(PilotScheme::user_group, K, K, tau_p).operations >
            online_complexity_report(PilotScheme::ib_km, K, K, tau_p).operations);
}
