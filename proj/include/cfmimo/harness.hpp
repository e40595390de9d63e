// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration: drops, scheme sweeps, result persistence and
// summaries.

#pragma once

#include "cfmimo/netgen.hpp"
#include "cfmimo/pilots.hpp"
#include "cfmimo/receiver.hpp"
#include "cfmimo/statistics.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace cfmimo {

/// monte_carlo estimates the decoding statistics from channel draws.
/// closed_form uses exact MR statistics: MR for fixed plans and
/// MR_normalized for pilot switching; the combiner list is then ignored.
enum class Evaluation { monte_carlo, closed_form };

std::string to_string(Evaluation e);
Evaluation evaluation_from_string(const std::string& s);

struct ExperimentSpec {
  NetworkConfig network;  // network.seed is the experiment seed
  int tau_p = 10;
  int tau_c = 200;
  std::vector<PilotScheme> schemes{PilotScheme::user_group};
  std::vector<CombinerKind> combiners{CombinerKind::lp_mmse};
  std::vector<Decoder> decoders{Decoder::p_lsfd};
  std::vector<double> theta_values{1.0};
  int trials = 1000;
  int repetitions = 1;
  double p_bar = 0.1;  // watts
  Evaluation evaluation = Evaluation::monte_carlo;
  KMeansOptions kmeans;           // seed is replaced per drop
  UserGroupOptions user_group;
  std::string output_dir = "results";
  int threads = 1;

  /// Throws std::invalid_argument when the spec cannot run.
  void validate() const;
};

struct ResultRow {
  int drop = 0;
  int ue = 0;
  PilotScheme scheme = PilotScheme::random;
  CombinerKind combiner = CombinerKind::mr;
  Decoder decoder = Decoder::lsfd;
  double theta = 0.0;
  double se = 0.0;
};

struct DropInfo {
  int drop = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string diagnostic;
  std::map<std::string, int> constraint_violations;  // per scheme
};

struct ResultStore {
  std::vector<ResultRow> rows;
  std::vector<DropInfo> drops;
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// Seed of drop `r` for an experiment seed.
std::uint64_t drop_seed(std::uint64_t experiment_seed, int r);

/// One network drop: every scheme, theta, combiner and decoder.
/// Rows are ordered by scheme, theta, combiner, decoder, UE.
std::vector<ResultRow> run_drop(const ExperimentSpec& spec, int drop, DropInfo* info = nullptr);

/// Every drop; a failing drop is logged in `drops` and contributes no rows.
ResultStore run_experiment(const ExperimentSpec& spec);

/// Columns usable for grouping: drop, scheme, combiner, decoder, theta.
std::string row_key(const ResultRow& row, const std::vector<std::string>& group_by);

struct GroupSummary {
  std::string group;
  SeSummary summary;
};

/// Pooled over UEs and drops by default. With `per_drop`, each summary
/// statistic is computed per drop and then averaged over drops.
std::vector<GroupSummary> summarize(const ResultStore& store,
                                    const std::vector<std::string>& group_by,
                                    bool per_drop = false);

using CdfCurve = std::vector<std::pair<double, double>>;  // (se, cdf), se ascending

std::map<std::string, CdfCurve> export_cdf(const ResultStore& store,
                                           const std::vector<std::string>& group_by);

}  // namespace cfmimo
