// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one PASS/FAIL line per criterion with the measured values.
// Exit status is nonzero if any selected criterion fails, except criteria
// listed with --known-red, which still print FAIL but do not affect the status.

#include "cfmimo/access.hpp"
#include "cfmimo/channel.hpp"
#include "cfmimo/harness.hpp"
#include "cfmimo/netgen.hpp"
#include "cfmimo/pilots.hpp"
#include "cfmimo/power.hpp"
#include "cfmimo/receiver.hpp"
#include "fixtures.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

namespace {

using namespace cfmimo;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int g_drops = 20;
int g_trials = 1000;
int g_validation_trials = 100000;

// Closed form against Monte-Carlo SE on the small validation instance. The
// gate applies both sides to the same P-LSFD weights (built from the closed
// form), so it measures only the statistics; the gap with weights built from
// each side's own statistics is reported alongside.
Outcome closed_form_check(bool switching, double tolerance) {
  double worst = 0.0;
  double worst_own = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    NetworkConfig cfg = testing::small_config(seed, 16, 8, 2);
    const NetworkRealization net = generate_network(cfg);
    const int tau_p = 4;
    const ServiceMap map = initial_access(net.beta, tau_p);
    const TransmitPowers powers{std::vector<double>(8, 0.1),
                                fractional_power(net.beta, map, 1.0, 0.1).powers};
    const double noise = net.noise_power;
    const double pre = prelog(tau_p, 200);
    const std::uint64_t mc_seed = derive_seed(seed, Stream::decoding);
    DecodingStats closed;
    DecodingStats mc;
    if (switching) {
      closed = closed_form_switching_stats(net, map, tau_p, powers.pilot, noise);
      mc = simulate_decoding_stats(net, map, assign_switching(8, tau_p, seed),
                                   CombinerKind::mr_normalized, powers, g_validation_trials, mc_seed);
    } else {
      const PilotPlan plan = assign_random(8, tau_p, seed);
      closed = closed_form_mr_stats(net, map, plan, powers.pilot, noise);
      mc = simulate_decoding_stats(net, map, plan, CombinerKind::mr, powers, g_validation_trials, mc_seed);
    }
    const auto w = lsfd_weights(closed, powers.data, noise, true, map.P);
    const auto w_mc = lsfd_weights(mc, powers.data, noise, true, map.P);
    const SeResult cf = se_monte_carlo(closed, w, powers.data, noise, pre);
    const SeResult sim = se_monte_carlo(mc, w, powers.data, noise, pre);
    const SeResult own = se_monte_carlo(mc, w_mc, powers.data, noise, pre);
    for (std::size_t k = 0; k < cf.se.size(); ++k) {
      worst = std::max(worst, std::abs(sim.se[k] - cf.se[k]) / cf.se[k]);
      worst_own = std::max(worst_own, std::abs(own.se[k] - cf.se[k]) / cf.se[k]);
    }
  }
  return {worst <= tolerance,
          fmt("max per-UE relative gap %.4f over 5 seeds at %d trials (tol %.2f); with own "
              "weights %.4f",
              worst, g_validation_trials, tolerance, worst_own)};
}

ExperimentSpec full_spec(int K) {
  ExperimentSpec spec;
  spec.network.K = K;
  spec.network.seed = 2024;
  spec.trials = g_trials;
  spec.repetitions = g_drops;
  spec.theta_values = {1.0};
  return spec;
}

std::map<std::string, SeSummary> grouped(const ResultStore& store,
                                         const std::vector<std::string>& by,
                                         bool per_drop = false) {
  std::map<std::string, SeSummary> out;
  for (const auto& g : summarize(store, by, per_drop)) out[g.group] = g.summary;
  return out;
}

Outcome criterion_plsfd_loss() {
  ExperimentSpec spec = full_spec(60);
  spec.schemes = {PilotScheme::user_group};
  spec.combiners = {CombinerKind::lp_mmse};
  spec.decoders = {Decoder::lsfd, Decoder::p_lsfd};
  const auto s = grouped(run_experiment(spec), {"decoder"});
  const double full = s.at("LSFD").percentile_5;
  const double part = s.at("P-LSFD").percentile_5;
  const double loss = (full - part) / full;
  return {std::abs(loss) <= 0.05,
          fmt("95%%-likely SE LSFD %.4f, P-LSFD %.4f, loss %.2f%% (tol 5%%)", full, part,
              100.0 * loss)};
}

Outcome criterion_ordering() {
  ExperimentSpec spec = full_spec(100);
  spec.schemes = {PilotScheme::random, PilotScheme::gb_km, PilotScheme::ib_km,
                  PilotScheme::user_group};
  spec.combiners = {CombinerKind::lp_mmse};
  spec.decoders = {Decoder::p_lsfd};
  const auto s = grouped(run_experiment(spec), {"scheme"});
  const double ug = s.at("user_group").percentile_5;
  const double ib = s.at("ib_km").percentile_5;
  const double gb = s.at("gb_km").percentile_5;
  const double rnd = s.at("random").percentile_5;
  const bool pass = ug > ib && ib > gb && gb > rnd && ug >= 1.1 * gb;
  return {pass, fmt("95%%-likely SE UG %.4f, IB-KM %.4f, GB-KM %.4f, random %.4f; UG/GB-KM %.3f "
                    "(need UG > IB-KM > GB-KM > random and >= 1.10)",
                    ug, ib, gb, rnd, ug / gb)};
}

Outcome criterion_switching_worst() {
  ExperimentSpec spec = full_spec(50);
  spec.evaluation = Evaluation::closed_form;
  spec.schemes = {PilotScheme::random, PilotScheme::switching};
  spec.theta_values = {0.0};  // MR comparisons run at equal power
  const auto s = grouped(run_experiment(spec), {"scheme"});
  const double sw = s.at("switching").percentile_5;
  const double rnd = s.at("random").percentile_5;
  return {sw < rnd, fmt("95%%-likely SE switching %.4f, random %.4f", sw, rnd)};
}

Outcome criterion_theta_sweep() {
  ExperimentSpec spec = full_spec(50);
  spec.schemes = {PilotScheme::user_group};
  spec.combiners = {CombinerKind::lp_mmse};
  spec.decoders = {Decoder::p_lsfd};
  spec.theta_values = {0.0, 0.5, 1.0};
  const auto s = grouped(run_experiment(spec), {"theta"}, true);
  const auto& a = s.at("theta=0");
  const auto& b = s.at("theta=0.5");
  const auto& c = s.at("theta=1");
  const bool spread = a.max_minus_min > b.max_minus_min && b.max_minus_min > c.max_minus_min;
  const bool avg = a.average >= b.average && b.average >= c.average;
  return {spread && avg,
          fmt("spread %.4f > %.4f > %.4f: %s; average %.4f >= %.4f >= %.4f: %s", a.max_minus_min,
              b.max_minus_min, c.max_minus_min, spread ? "yes" : "no", a.average, b.average,
              c.average, avg ? "yes" : "no")};
}

Outcome criterion_invariants() {
  int violations = 0;
  int checked_ues = 0;
  std::string first;
  auto fail = [&](const std::string& what) {
    if (violations++ == 0) first = what;
  };
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    NetworkConfig cfg;
    cfg.L = 36;
    cfg.K = 40;
    cfg.N = 2;
    cfg.seed = seed;
    const int tau_p = 5;
    const NetworkRealization net = generate_network(cfg);
    const ServiceMap map = initial_access(net.beta, tau_p);
    for (int l = 0; l < map.L; ++l)
      if (static_cast<int>(map.D[l].size()) > tau_p) fail("AP over capacity");
    for (int k = 0; k < map.K; ++k) {
      if (map.M[k].empty()) fail("unserved UE");
      if (map.P[k].size() > (tau_p - 1) * map.M[k].size() + 1) fail("|P_k| bound");
    }
    const PilotPlan plan = assign_user_group(net.beta, map, tau_p);
    const std::vector<double> pilot(40, 0.1);
    const auto es = compute_estimation_stats(net, plan, pilot, net.noise_power);
    for (int k = 0; k < net.K; ++k)
      for (int l = 0; l < net.L; ++l) {
        const CMat& r = net.corr(k, l);
        if ((es.b(k, l) + es.c(k, l) - r).norm() > 1e-9 * r.norm()) fail("B + C != R");
      }
    const std::vector<double> data = fractional_power(net.beta, map, 0.5, 0.1).powers;
    const auto st = closed_form_mr_stats(net, map, plan, pilot, net.noise_power);
    const auto w = lsfd_weights(st, data, net.noise_power, false, map.P);
    const auto best = sinr(st, w, data, net.noise_power);
    Rng rng(seed);
    for (int n = 0; n < 100; ++n) {
      std::vector<CVec> r(w.size());
      for (std::size_t k = 0; k < w.size(); ++k) {
        r[k].resize(w[k].size());
        for (Eigen::Index c = 0; c < r[k].size(); ++c) r[k](c) = rng.complex_normal();
        r[k].normalize();
      }
      const auto other = sinr(st, r, data, net.noise_power);
      for (std::size_t k = 0; k < w.size(); ++k)
        if (other[k] > best[k] * (1 + 1e-9)) fail("random weights beat LSFD");
    }
    std::vector<int> all(40);
    std::iota(all.begin(), all.end(), 0);
    const auto wp = lsfd_weights(st, data, net.noise_power, true,
                                 std::vector<std::vector<int>>(40, all));
    for (int k = 0; k < 40; ++k)
      if (wp[k] != w[k]) fail("P-LSFD with full sets differs from LSFD");
    checked_ues += 40;
  }
  return {violations == 0, violations == 0
                               ? fmt("all properties hold on 5 drops (%d UEs)", checked_ues)
                               : fmt("%d violations, first: %s", violations, first.c_str())};
}

Outcome criterion_worked_examples() {
  std::vector<std::string> bad;
  const ServiceMap map = testing::grouping_example_map();
  const auto st = build_grouping(testing::grouping_example_beta(), map, 1.0);
  Eigen::MatrixXi T(5, 5);
  T << 2, 1, 0, 0, 0, 1, 2, 0, 0, 0, 0, 0, 3, 1, 1, 0, 0, 1, 2, 1, 0, 0, 1, 1, 4;
  const auto sets = testing::grouping_example_sets();
  for (int k = 0; k < 5; ++k)
    for (int l = 0; l < 9; ++l)
      if (st.s(l, k) != std::binary_search(sets[k].begin(), sets[k].end(), l)) bad.push_back("S");
  if (st.T != T) bad.push_back("T");
  if (st.groups != std::vector<std::vector<int>>{{0, 2}, {1, 3}, {4}}) bad.push_back("groups");

  const std::array<double, 4> d1{75, 50, 70, 45}, a1{0, 1, 0, 1};
  const std::array<double, 4> d2{45, 60, 55, 65}, a2{1, 0, 1, 0};
  const std::array<double, 4> d3{65, 60, 55, 50}, a3{0, 1, 1, 1};
  const double dis12 = dis_metric(d1, a1, d2, a2);
  const double dis13 = dis_metric(d1, a1, d3, a3);
  if (dis12 != 9575.0 || dis13 != 3150.0 || !(dis12 > dis13)) bad.push_back("Dis");

  const FronthaulComplexity c = lsfd_cost(20, 40);
  // 20*40 + (400*1600 + 800)/2 and 210*40 + (8000-20)/3 + 400.
  if (c.fronthaul_scalars != 321200.0) bad.push_back("fronthaul");
  if (std::abs(c.complexity_mults - 11460.0) > 1e-9) bad.push_back("complexity");

  std::string detail = fmt("Dis %.0f / %.0f, fronthaul %.0f, mults %.0f", dis12, dis13,
                           c.fronthaul_scalars, c.complexity_mults);
  for (const auto& b : bad) detail += "; mismatch: " + b;
  return {bad.empty(), detail};
}

Outcome criterion_pilot_count() {
  std::map<int, std::map<std::string, SeSummary>> by_tau;
  for (int tau_p : {10, 25}) {
    ExperimentSpec spec = full_spec(50);
    spec.tau_p = tau_p;
    spec.evaluation = Evaluation::closed_form;
    spec.schemes = {PilotScheme::random, PilotScheme::user_group};
    spec.theta_values = {0.0};  // MR comparisons run at equal power
    by_tau[tau_p] = grouped(run_experiment(spec), {"scheme"});
  }
  const double r10 = by_tau[10].at("random").percentile_5;
  const double r25 = by_tau[25].at("random").percentile_5;
  const double u10 = by_tau[10].at("user_group").percentile_5;
  const double u25 = by_tau[25].at("user_group").percentile_5;
  return {r25 > r10 && u25 > u10,
          fmt("95%%-likely SE random %.4f -> %.4f, User-Group %.4f -> %.4f (tau_p 10 -> 25)",
              r10, r25, u10, u25)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  std::vector<int> known_red;
  app.add_option("criteria", only, "Criteria to run (default: all)");
  app.add_option("--known-red", known_red, "Criteria whose failure does not set the exit status");
  app.add_option("--drops", g_drops, "Network drops for experiment criteria");
  app.add_option("--trials", g_trials, "Monte-Carlo trials per drop");
  app.add_option("--validation-trials", g_validation_trials,
                 "Monte-Carlo trials for the closed-form checks");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"closed-form MR vs Monte-Carlo", [] { return closed_form_check(false, 0.02); }},
      {"closed-form switching vs Monte-Carlo", [] { return closed_form_check(true, 0.03); }},
      {"P-LSFD loss at K=60", criterion_plsfd_loss},
      {"pilot-scheme ordering at K=100", criterion_ordering},
      {"random switching is worst", criterion_switching_worst},
      {"power-control trade-off", criterion_theta_sweep},
      {"structural invariants", criterion_invariants},
      {"worked examples", criterion_worked_examples},
      {"pilot-count effect", criterion_pilot_count},
  };
  const std::set<int> selected(only.begin(), only.end());
  const std::set<int> tolerated(known_red.begin(), known_red.end());
  int failing = 0;
  for (std::size_t n = 0; n < criteria.size(); ++n) {
    const int id = static_cast<int>(n) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[n].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %d. %s: %s (%.1f s)%s\n", o.pass ? "PASS" : "FAIL", id, criteria[n].first,
                o.detail.c_str(), secs, !o.pass && tolerated.count(id) ? " [known red]" : "");
    std::fflush(stdout);
    if (!o.pass && !tolerated.count(id)) ++failing;
  }
  return failing == 0 ? 0 : 1;
}
