// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/harness.hpp"

#include "cfmimo/access.hpp"
#include "cfmimo/power.hpp"
#include "cfmimo/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <exception>
#include <iostream>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

namespace cfmimo {

std::string to_string(Evaluation e) {
  return e == Evaluation::monte_carlo ? "monte_carlo" : "closed_form";
}

Evaluation evaluation_from_string(const std::string& s) {
  std::string n = s;
  for (auto& ch : n) {
    if (ch == '-') ch = '_';
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  if (n == "monte_carlo") return Evaluation::monte_carlo;
  if (n == "closed_form") return Evaluation::closed_form;
  throw std::invalid_argument("unknown evaluation mode: " + s);
}

void ExperimentSpec::validate() const {
  network.validate();
  if (tau_p < 1) throw std::invalid_argument("tau_p must be >= 1");
  if (tau_c <= tau_p) throw std::invalid_argument("tau_p must be smaller than tau_c");
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  if (schemes.empty()) throw std::invalid_argument("at least one pilot scheme is required");
  if (decoders.empty()) throw std::invalid_argument("at least one decoder is required");
  if (theta_values.empty()) throw std::invalid_argument("at least one theta value is required");
  for (double t : theta_values)
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("theta must be in [0, 1]");
  if (!(p_bar > 0.0)) throw std::invalid_argument("p_bar must be positive");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (evaluation == Evaluation::monte_carlo) {
    if (combiners.empty()) throw std::invalid_argument("at least one combiner is required");
    if (trials < 2) throw std::invalid_argument("trials must be >= 2");
  }
  if (network.K > network.L * tau_p)
    throw std::invalid_argument("infeasible: K exceeds L * tau_p");
}

std::uint64_t drop_seed(std::uint64_t experiment_seed, int r) {
  return derive_seed(experiment_seed, Stream::drop, {static_cast<std::uint64_t>(r)});
}

namespace {

PilotPlan make_plan(PilotScheme scheme, const ExperimentSpec& spec, const NetworkRealization& net,
                    const ServiceMap& map, std::uint64_t seed) {
  const auto tag = static_cast<std::uint64_t>(scheme);
  switch (scheme) {
    case PilotScheme::random:
      return assign_random(net.K, spec.tau_p, derive_seed(seed, Stream::pilot_plan, {tag}));
    case PilotScheme::switching:
      return assign_switching(net.K, spec.tau_p, derive_seed(seed, Stream::pilot_plan, {tag}));
    case PilotScheme::gb_km: {
      KMeansOptions opts = spec.kmeans;
      opts.seed = derive_seed(seed, Stream::kmeans, {tag});
      return assign_gb_km(net.ue_positions, net.side_length, spec.tau_p, opts);
    }
    case PilotScheme::ib_km: {
      KMeansOptions opts = spec.kmeans;
      opts.seed = derive_seed(seed, Stream::kmeans, {tag});
      return assign_ib_km(net, map, spec.tau_p, opts);
    }
    case PilotScheme::user_group:
      return assign_user_group(net.beta, map, spec.tau_p, spec.user_group);
  }
  throw std::invalid_argument("unknown pilot scheme");
}

void append_rows(std::vector<ResultRow>& rows, int drop, PilotScheme scheme,
                 CombinerKind combiner, Decoder decoder, double theta,
                 const std::vector<double>& se) {
  for (std::size_t k = 0; k < se.size(); ++k)
    rows.push_back({drop, static_cast<int>(k), scheme, combiner, decoder, theta, se[k]});
}

}  // namespace

std::vector<ResultRow> run_drop(const ExperimentSpec& spec, int drop, DropInfo* info) {
  const std::uint64_t seed = drop_seed(spec.network.seed, drop);
  NetworkConfig cfg = spec.network;
  cfg.seed = seed;
  const NetworkRealization net = generate_network(cfg);
  const ServiceMap map = initial_access(net.beta, spec.tau_p);
  const double pre = prelog(spec.tau_p, spec.tau_c);
  const double noise = net.noise_power;
  // Common random numbers across schemes, thetas and combiners.
  const std::uint64_t mc_seed = derive_seed(seed, Stream::decoding);
  const std::vector<double> pilot(static_cast<std::size_t>(net.K), spec.p_bar);

  std::vector<ResultRow> rows;
  for (PilotScheme scheme : spec.schemes) {
    const PilotPlan plan = make_plan(scheme, spec, net, map, seed);
    if (info != nullptr) info->constraint_violations[to_string(scheme)] = plan.constraint_violations;

    // Statistics of MR-type combiners do not depend on data powers.
    std::optional<DecodingStats> closed;
    std::map<CombinerKind, DecodingStats> power_free;
    for (double theta : spec.theta_values) {
      const PowerPolicy pol = fractional_power(net.beta, map, theta, spec.p_bar);
      const TransmitPowers powers{pilot, pol.powers};

      if (spec.evaluation == Evaluation::closed_form) {
        if (!closed) {
          closed = plan.switching
                       ? closed_form_switching_stats(net, map, spec.tau_p, pilot, noise)
                       : closed_form_mr_stats(net, map, plan, pilot, noise);
        }
        const CombinerKind used = plan.switching ? CombinerKind::mr_normalized : CombinerKind::mr;
        for (Decoder dec : spec.decoders) {
          const auto w = lsfd_weights(*closed, powers.data, noise, dec == Decoder::p_lsfd, map.P);
          const SeResult r = se_monte_carlo(*closed, w, powers.data, noise, pre);
          append_rows(rows, drop, scheme, used, dec, theta, r.se);
        }
        continue;
      }

      for (CombinerKind comb : spec.combiners) {
        const DecodingStats* stats = nullptr;
        DecodingStats fresh;
        if (comb == CombinerKind::lp_mmse) {
          fresh = simulate_decoding_stats(net, map, plan, comb, powers, spec.trials, mc_seed);
          stats = &fresh;
        } else {
          auto it = power_free.find(comb);
          if (it == power_free.end())
            it = power_free
                     .emplace(comb, simulate_decoding_stats(net, map, plan, comb, powers,
                                                            spec.trials, mc_seed))
                     .first;
          stats = &it->second;
        }
        for (Decoder dec : spec.decoders) {
          const auto w = lsfd_weights(*stats, powers.data, noise, dec == Decoder::p_lsfd, map.P);
          const SeResult r = se_monte_carlo(*stats, w, powers.data, noise, pre);
          append_rows(rows, drop, scheme, comb, dec, theta, r.se);
        }
      }
    }
  }
  return rows;
}

ResultStore run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ResultStore store;
  store.seed = spec.network.seed;
  const int reps = spec.repetitions;
  std::vector<std::vector<ResultRow>> per_drop(static_cast<std::size_t>(reps));
  std::vector<DropInfo> infos(static_cast<std::size_t>(reps));

  auto work = [&](int r) {
    DropInfo& info = infos[r];
    info.drop = r;
    info.seed = drop_seed(spec.network.seed, r);
    try {
      per_drop[r] = run_drop(spec, r, &info);
    } catch (const std::exception& e) {
      info.ok = false;
      info.diagnostic = e.what();
      per_drop[r].clear();
    }
  };

  const int workers = std::min(spec.threads, reps);
  if (workers <= 1) {
    for (int r = 0; r < reps; ++r) work(r);
  } else {
    std::mutex m;
    int next = 0;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          int r = 0;
          {
            std::lock_guard<std::mutex> lock(m);
            if (next >= reps) return;
            r = next++;
          }
          work(r);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  for (int r = 0; r < reps; ++r) {
    if (!infos[r].ok)
      std::cerr << "drop " << r << " aborted: " << infos[r].diagnostic << '\n';
    store.rows.insert(store.rows.end(), per_drop[r].begin(), per_drop[r].end());
  }
  store.drops = std::move(infos);
  return store;
}

// ---------------------------------------------------------------------------
// Summaries

namespace {

std::string format_theta(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", t);
  return buf;
}

}  // namespace

std::string row_key(const ResultRow& row, const std::vector<std::string>& group_by) {
  std::string key;
  for (const auto& col : group_by) {
    if (!key.empty()) key += '|';
    if (col == "scheme")
      key += to_string(row.scheme);
    else if (col == "combiner")
      key += to_string(row.combiner);
    else if (col == "decoder")
      key += to_string(row.decoder);
    else if (col == "theta")
      key += "theta=" + format_theta(row.theta);
    else if (col == "drop")
      key += "drop=" + std::to_string(row.drop);
    else
      throw std::invalid_argument("unknown group column: " + col);
  }
  return key.empty() ? "all" : key;
}

std::vector<GroupSummary> summarize(const ResultStore& store,
                                    const std::vector<std::string>& group_by, bool per_drop) {
  if (store.rows.empty()) throw std::invalid_argument("cannot summarize an empty store");
  // Groups keep first-appearance order.
  std::vector<std::string> order;
  std::map<std::string, std::map<int, std::vector<double>>> values;
  for (const auto& row : store.rows) {
    const std::string key = row_key(row, group_by);
    auto [it, inserted] = values.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second[per_drop ? row.drop : 0].push_back(row.se);
  }
  std::vector<GroupSummary> out;
  for (const auto& key : order) {
    const auto& drops = values[key];
    GroupSummary g;
    g.group = key;
    for (const auto& [d, v] : drops) {
      const SeSummary s = summarize_values(v);
      g.summary.average += s.average;
      g.summary.percentile_5 += s.percentile_5;
      g.summary.max_minus_min += s.max_minus_min;
      g.summary.count += s.count;
    }
    const double n = static_cast<double>(drops.size());
    g.summary.average /= n;
    g.summary.percentile_5 /= n;
    g.summary.max_minus_min /= n;
    out.push_back(g);
  }
  return out;
}

std::map<std::string, CdfCurve> export_cdf(const ResultStore& store,
                                           const std::vector<std::string>& group_by) {
  std::map<std::string, std::vector<double>> values;
  for (const auto& row : store.rows) values[row_key(row, group_by)].push_back(row.se);
  std::map<std::string, CdfCurve> out;
  for (auto& [key, v] : values) {
    std::sort(v.begin(), v.end());
    CdfCurve curve;
    curve.reserve(v.size());
    const double n = static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      curve.emplace_back(v[i], static_cast<double>(i + 1) / n);
    out.emplace(key, std::move(curve));
  }
  return out;
}

}  // namespace cfmimo
