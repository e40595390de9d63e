// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/access.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cfmimo {

ServiceMap ServiceMap::from_serving_sets(int L, int K, int tau_p,
                                         std::vector<std::vector<int>> serving) {
  if (static_cast<int>(serving.size()) != K)
    throw std::invalid_argument("serving sets must have one entry per UE");
  ServiceMap map;
  map.L = L;
  map.K = K;
  map.tau_p = tau_p;
  map.A.assign(static_cast<std::size_t>(L) * K, 0);
  map.D.assign(static_cast<std::size_t>(L), {});
  for (int k = 0; k < K; ++k) {
    auto& m = serving[static_cast<std::size_t>(k)];
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
    for (int l : m) {
      if (l < 0 || l >= L) throw std::invalid_argument("AP index out of range");
      map.A[static_cast<std::size_t>(l) * K + k] = 1;
      map.D[static_cast<std::size_t>(l)].push_back(k);
    }
  }
  map.M = std::move(serving);
  map.P = derive_interferer_sets(map);
  return map;
}

void ServiceMap::check_invariants() const {
  for (int l = 0; l < L; ++l) {
    const auto& d = D[static_cast<std::size_t>(l)];
    if (static_cast<int>(d.size()) > tau_p)
      throw std::logic_error("AP " + std::to_string(l) + " serves more than tau_p UEs");
    for (int k : d)
      if (!serves(l, k)) throw std::logic_error("D and A disagree");
  }
  for (int k = 0; k < K; ++k) {
    const auto& m = M[static_cast<std::size_t>(k)];
    if (m.empty()) throw std::logic_error("UE " + std::to_string(k) + " has no serving AP");
    for (int l : m) {
      if (!serves(l, k)) throw std::logic_error("M and A disagree");
      const auto& d = D[static_cast<std::size_t>(l)];
      if (!std::binary_search(d.begin(), d.end(), k)) throw std::logic_error("M and D disagree");
    }
    const auto bound = static_cast<std::size_t>((tau_p - 1) * static_cast<int>(m.size()) + 1);
    if (P[static_cast<std::size_t>(k)].size() > bound)
      throw std::logic_error("|P_k| exceeds (tau_p - 1)|M_k| + 1");
  }
  std::size_t ones = 0;
  for (auto a : A) ones += a;
  std::size_t listed = 0;
  for (const auto& m : M) listed += m.size();
  if (ones != listed) throw std::logic_error("A has entries not listed in M");
}

namespace {

struct AccessState {
  int L;
  int K;
  int tau_p;
  const RMat& beta;
  std::vector<std::vector<char>> in_m;  // [k][l]
  std::vector<std::vector<char>> in_b;  // [k][l]
  std::vector<int> blacklist_size;
  std::vector<std::vector<int>> D;
  std::vector<char> is_protected;

  AccessState(const RMat& b, int tau)
      : L(static_cast<int>(b.cols())),
        K(static_cast<int>(b.rows())),
        tau_p(tau),
        beta(b),
        in_m(static_cast<std::size_t>(K), std::vector<char>(static_cast<std::size_t>(L), 0)),
        in_b(static_cast<std::size_t>(K), std::vector<char>(static_cast<std::size_t>(L), 0)),
        blacklist_size(static_cast<std::size_t>(K), 0),
        D(static_cast<std::size_t>(L)),
        is_protected(static_cast<std::size_t>(K), 0) {}

  void join(int k, int l) {
    in_m[k][l] = 1;
    D[l].push_back(k);
  }

  void evict(int k, int l) {
    in_m[k][l] = 0;
    auto& d = D[l];
    d.erase(std::find(d.begin(), d.end(), k));
    if (!in_b[k][l]) {
      in_b[k][l] = 1;
      ++blacklist_size[k];
    }
    if (blacklist_size[k] >= L - 1) is_protected[k] = 1;
  }

  // Weakest unprotected UE at AP l, lowest index on ties; -1 if none.
  int weakest_evictable(int l) const {
    int best = -1;
    for (int i : D[l]) {
      if (is_protected[i]) continue;
      if (best < 0 || beta(i, l) < beta(best, l) || (beta(i, l) == beta(best, l) && i < best))
        best = i;
    }
    return best;
  }
};

}  // namespace

ServiceMap initial_access(const RMat& beta, int tau_p, bool allow_overload) {
  const int K = static_cast<int>(beta.rows());
  const int L = static_cast<int>(beta.cols());
  if (K < 1 || L < 1) throw std::invalid_argument("beta must be non-empty");
  if (tau_p < 1) throw std::invalid_argument("tau_p must be >= 1");
  if (!allow_overload && static_cast<long long>(K) > static_cast<long long>(L) * tau_p)
    throw std::invalid_argument("infeasible access instance: K = " + std::to_string(K) +
                                " exceeds L * tau_p = " + std::to_string(L * tau_p));
  if ((beta.array() <= 0.0).any()) throw std::invalid_argument("beta must be positive");

  AccessState st(beta, tau_p);
  for (int k = 0; k < K; ++k) {
    while (true) {
      int best = -1;
      int available = 0;
      for (int j = 0; j < L; ++j) {
        if (st.in_m[k][j] || st.in_b[k][j]) continue;
        ++available;
        if (best < 0 || beta(k, j) > beta(k, best)) best = j;
      }
      if (available == 0) break;
      // A UE without a fallback AP is protected when it contests a full AP.
      if (st.blacklist_size[k] >= L - 1 && static_cast<int>(st.D[best].size()) >= tau_p)
        st.is_protected[k] = 1;

      if (st.is_protected[k]) {
        // Protected UEs are forced onto the single AP they have not lost.
        st.join(k, best);
        if (static_cast<int>(st.D[best].size()) > tau_p) {
          const int loser = st.weakest_evictable(best);
          if (loser < 0)
            throw std::runtime_error("initial access: AP " + std::to_string(best) +
                                     " holds only protected UEs");
          st.evict(loser, best);
        }
        break;
      }

      st.join(k, best);
      if (static_cast<int>(st.D[best].size()) > tau_p) {
        const int loser = st.weakest_evictable(best);
        st.evict(loser, best);
      }
    }
  }

  std::vector<std::vector<int>> serving(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L; ++l)
      if (st.in_m[k][l]) serving[k].push_back(l);
  ServiceMap map = ServiceMap::from_serving_sets(L, K, tau_p, std::move(serving));
  return map;
}

ServiceMap strongest_per_ap(const RMat& beta, int tau_p) {
  const int K = static_cast<int>(beta.rows());
  const int L = static_cast<int>(beta.cols());
  if (tau_p < 1) throw std::invalid_argument("tau_p must be >= 1");
  std::vector<std::vector<int>> serving(static_cast<std::size_t>(K));
  std::vector<int> order(static_cast<std::size_t>(K));
  for (int l = 0; l < L; ++l) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return beta(a, l) > beta(b, l); });
    for (int n = 0; n < std::min(tau_p, K); ++n) serving[order[n]].push_back(l);
  }
  return ServiceMap::from_serving_sets(L, K, tau_p, std::move(serving));
}

std::vector<std::vector<int>> derive_interferer_sets(const ServiceMap& map) {
  std::vector<std::vector<int>> P(static_cast<std::size_t>(map.K));
  std::vector<char> seen(static_cast<std::size_t>(map.K));
  for (int k = 0; k < map.K; ++k) {
    std::fill(seen.begin(), seen.end(), 0);
    for (int l : map.M[k])
      for (int i : map.D[l]) seen[i] = 1;
    seen[k] = 1;
    for (int i = 0; i < map.K; ++i)
      if (seen[i]) P[k].push_back(i);
  }
  return P;
}

}  // namespace cfmimo
