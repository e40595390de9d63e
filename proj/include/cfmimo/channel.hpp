// SPDX-License-Identifier: Apache-2.0
//
// Correlated Rayleigh channel realizations, pilot reception and MMSE channel
// estimation under pilot contamination.

#pragma once

#include "cfmimo/access.hpp"
#include "cfmimo/netgen.hpp"
#include "cfmimo/pilots.hpp"
#include "cfmimo/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace cfmimo {

/// Channel realizations for `trials` coherence blocks.
struct ChannelBatch {
  int trials = 0;
  int K = 0;
  int L = 0;
  int N = 0;
  std::uint64_t trial_seed_base = 0;
  std::vector<CVec> h;  // index (trial * K + k) * L + l

  const CVec& at(int trial, int k, int l) const {
    return h[(static_cast<std::size_t>(trial) * K + k) * L + l];
  }
  /// The K * L channels of one trial, index k * L + l.
  std::span<const CVec> trial(int t) const {
    const std::size_t n = static_cast<std::size_t>(K) * L;
    return {h.data() + static_cast<std::size_t>(t) * n, n};
  }
};

/// Draws h_kl = R_kl^{1/2} z for one trial from a stream derived from
/// (seed, trial), so any trial can be regenerated in isolation.
class ChannelSampler {
 public:
  explicit ChannelSampler(const NetworkRealization& net);

  /// Fills `out` (resized to K * L, index k * L + l).
  void draw(std::uint64_t seed, int trial, std::vector<CVec>& out) const;

  int K() const { return K_; }
  int L() const { return L_; }
  int N() const { return N_; }

 private:
  int K_;
  int L_;
  int N_;
  std::vector<CMat> sqrt_r_;
};

ChannelBatch draw_channels(const NetworkRealization& net, int trials, std::uint64_t seed);

/// Second-order statistics of MMSE estimation for a fixed pilot plan.
///
/// Psi[t * L + l] is the correlation of the received pilot t at AP l,
/// B/C the estimate/error covariances and `estimator` the matrix
/// sqrt(tau_p p_k) R_kl Psi^{-1} mapping the received pilot to the estimate.
/// When built for served pairs only, entries of unserved (k, l) are empty.
struct EstimationStats {
  int tau_p = 0;
  int K = 0;
  int L = 0;
  int N = 0;
  std::vector<CMat> Psi;
  std::vector<CMat> B;
  std::vector<CMat> C;
  std::vector<CMat> estimator;

  const CMat& psi(int t, int l) const { return Psi[static_cast<std::size_t>(t) * L + l]; }
  const CMat& b(int k, int l) const { return B[static_cast<std::size_t>(k) * L + l]; }
  const CMat& c(int k, int l) const { return C[static_cast<std::size_t>(k) * L + l]; }
  const CMat& est(int k, int l) const { return estimator[static_cast<std::size_t>(k) * L + l]; }
};

EstimationStats compute_estimation_stats(const NetworkRealization& net, const PilotPlan& plan,
                                         const std::vector<double>& pilot_powers, double noise,
                                         const ServiceMap* served_only = nullptr);

/// Received pilot signals and MMSE estimates for one trial.
///
/// `h` holds the K * L channels of the trial. Pilot noise is drawn for every
/// (pilot, AP) pair from a stream derived from (seed, trial). Estimates are
/// written to `hhat` (index k * L + l); with `served_only`, only served pairs
/// are filled.
void estimate_trial(const EstimationStats& stats, const PilotPlan& plan,
                    const std::vector<double>& pilot_powers, double noise,
                    std::span<const CVec> h, std::uint64_t seed, int trial,
                    std::vector<CVec>& hhat, const ServiceMap* served_only = nullptr);

/// Estimates for every (trial, k, l) of a batch; same layout as ChannelBatch::h.
std::vector<CVec> estimate_channels(const ChannelBatch& batch, const EstimationStats& stats,
                                    const PilotPlan& plan,
                                    const std::vector<double>& pilot_powers, double noise,
                                    std::uint64_t seed);

}  // namespace cfmimo
