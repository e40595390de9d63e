// SPDX-License-Identifier: Apache-2.0
//
// Two-layer uplink decoding: local combining at each AP followed by
// large-scale fading decoding (LSFD) at the CPU. SE is evaluated with the
// use-and-then-forget bound, either from Monte-Carlo statistics or from
// closed forms for MR combining.

#pragma once

#include "cfmimo/access.hpp"
#include "cfmimo/channel.hpp"
#include "cfmimo/netgen.hpp"
#include "cfmimo/pilots.hpp"
#include "cfmimo/statistics.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cfmimo {

enum class CombinerKind { mr, mr_normalized, lp_mmse };
enum class Decoder { lsfd, p_lsfd };
enum class SeMethod { monte_carlo, closed_form_mr, closed_form_switching };

std::string to_string(CombinerKind c);
std::string to_string(Decoder d);
std::string to_string(SeMethod m);
CombinerKind combiner_from_string(const std::string& s);
Decoder decoder_from_string(const std::string& s);

struct TransmitPowers {
  std::vector<double> pilot;  // watts, per UE
  std::vector<double> data;   // watts, per UE
};

/// Local combining vectors of one trial: a[k][s] belongs to AP M_k[s].
using TrialCombiners = std::vector<std::vector<CVec>>;

/// Per-AP combiner with the trial-independent parts precomputed.
class LocalCombiner {
 public:
  /// `stats` must hold estimation statistics for every served pair.
  LocalCombiner(CombinerKind kind, const ServiceMap& map, const EstimationStats& stats,
                const std::vector<double>& data_powers, double noise);

  /// `hhat` holds the estimates of one trial, index k * L + l.
  void apply(std::span<const CVec> hhat, TrialCombiners& out) const;

  CombinerKind kind() const { return kind_; }
  /// Number of B inversions that needed a ridge.
  int regularized() const { return regularized_; }

 private:
  CombinerKind kind_;
  const ServiceMap* map_;
  int N_;
  std::vector<double> powers_;
  std::vector<std::vector<int>> slot_;  // slot_[l][j]: position of AP l in M_{D_l[j]}
  std::vector<CMat> b_inv_;             // index k * L + l, MR_normalized only
  std::vector<CMat> base_;              // per AP, LP-MMSE only
  int regularized_ = 0;
};

/// Sample means of the UatF expectations over M_k coordinates.
///
/// With g_ki[s] = a_{k,M_k[s]}^H h_{i,M_k[s]}: v[k] = E{g_kk},
/// Lambda1_ki = E{g_ki g_ki^H}, lambda2[k][s] = E{|a_{k,M_k[s]}|^2}.
/// lambda1_packed[k] is |M_k| x (|M_k| K); entry (s, c K + i) is Lambda1_ki(s, c).
struct DecodingStats {
  int K = 0;
  std::vector<std::vector<int>> serving;
  std::vector<CVec> v;
  std::vector<CMat> lambda1_packed;
  std::vector<RVec> lambda2;
  int trials = 0;  // 0 for closed forms

  CMat lambda1(int k, int i) const;
  /// sum_i c_i Lambda1_ki.
  CMat weighted_lambda1(int k, std::span<const double> c) const;
};

/// Streaming reduction of per-trial outer products.
class DecodingAccumulator {
 public:
  explicit DecodingAccumulator(const ServiceMap& map);

  /// `h` holds the true channels of the trial, index k * L + l.
  void add_trial(const TrialCombiners& a, std::span<const CVec> h);
  /// Adds the sums of another accumulator over the same map.
  void merge(const DecodingAccumulator& other);
  DecodingStats finish() const;
  int trials() const { return trials_; }

 private:
  const ServiceMap* map_;
  std::vector<CVec> v_;
  std::vector<CMat> lambda1_;
  std::vector<RVec> lambda2_;
  CMat g_;
  int trials_ = 0;
};

/// Combiners for every trial of a batch; `estimates` uses the batch layout.
std::vector<TrialCombiners> combine_local(CombinerKind kind, const ChannelBatch& batch,
                                          const std::vector<CVec>& estimates,
                                          const EstimationStats& stats, const ServiceMap& map,
                                          const std::vector<double>& data_powers, double noise);

DecodingStats estimate_decoding_stats(const std::vector<TrialCombiners>& combiners,
                                      const ChannelBatch& batch, const ServiceMap& map);

/// Monte-Carlo statistics without storing the batch. A switching plan is
/// redrawn for each trial, so the expectations cover pilot randomness too.
DecodingStats simulate_decoding_stats(const NetworkRealization& net, const ServiceMap& map,
                                      const PilotPlan& plan, CombinerKind kind,
                                      const TransmitPowers& powers, int trials,
                                      std::uint64_t seed);

/// w_k = (sum_{i in I_k} p_i Lambda1_ki + noise Lambda2_k)^{-1} v_k, where I_k
/// is every UE, or P_k when `partial`.
std::vector<CVec> lsfd_weights(const DecodingStats& stats, const std::vector<double>& powers,
                               double noise, bool partial,
                               const std::vector<std::vector<int>>& P,
                               int* regularized = nullptr);

/// UatF SINR; interference always sums over every UE.
std::vector<double> sinr(const DecodingStats& stats, const std::vector<CVec>& weights,
                         const std::vector<double>& powers, double noise);

double prelog(int tau_p, int tau_c);

struct SeResult {
  std::vector<double> se;
  SeMethod method = SeMethod::monte_carlo;
  double prelog = 0.0;
  SeSummary summary;
};

SeResult se_monte_carlo(const DecodingStats& stats, const std::vector<CVec>& weights,
                        const std::vector<double>& powers, double noise, double prelog_factor);

/// Exact expectations for MR combining (a = hhat) under a fixed plan.
DecodingStats closed_form_mr_stats(const NetworkRealization& net, const ServiceMap& map,
                                   const PilotPlan& plan, const std::vector<double>& pilot_powers,
                                   double noise);

/// Exact expectations for a = B^{-1} hhat with pilots redrawn uniformly in
/// every block, averaged over channel and pilot randomness.
DecodingStats closed_form_switching_stats(const NetworkRealization& net, const ServiceMap& map,
                                          int tau_p, const std::vector<double>& pilot_powers,
                                          double noise);

SeResult se_closed_form_mr(const NetworkRealization& net, const ServiceMap& map,
                           const PilotPlan& plan, const TransmitPowers& powers, double noise,
                           const std::vector<CVec>& weights, double prelog_factor);
/// Same with LSFD or P-LSFD weights built from the closed-form statistics.
SeResult se_closed_form_mr(const NetworkRealization& net, const ServiceMap& map,
                           const PilotPlan& plan, const TransmitPowers& powers, double noise,
                           Decoder decoder, double prelog_factor);

SeResult se_closed_form_switching(const NetworkRealization& net, const ServiceMap& map,
                                  int tau_p, const TransmitPowers& powers, double noise,
                                  const std::vector<CVec>& weights, double prelog_factor);
SeResult se_closed_form_switching(const NetworkRealization& net, const ServiceMap& map,
                                  int tau_p, const TransmitPowers& powers, double noise,
                                  Decoder decoder, double prelog_factor);

struct FronthaulComplexity {
  double fronthaul_scalars = 0.0;
  double complexity_mults = 0.0;
};

/// Cost of LSFD statistics for one UE with `m` serving APs and `n`
/// interferers in the decoding sum (K for LSFD, |P_k| for P-LSFD).
FronthaulComplexity lsfd_cost(int m, int n);

/// Per-UE costs; K is the number of UEs in the full sum.
std::vector<FronthaulComplexity> fronthaul_complexity(const ServiceMap& map, int K, int tau_p,
                                                      bool partial);

}  // namespace cfmimo
