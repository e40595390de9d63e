// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: run, summarize, cdf, complexity, validate.

#include "cfmimo/access.hpp"
#include "cfmimo/harness.hpp"
#include "cfmimo/io.hpp"
#include "cfmimo/netgen.hpp"
#include "cfmimo/pilots.hpp"
#include "cfmimo/power.hpp"
#include "cfmimo/receiver.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace cfmimo;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

struct RunArgs {
  std::string config;
  std::string out;
  std::string schemes;
  std::string theta;
  std::string group_by = "scheme,combiner,decoder,theta";
  long long seed = -1;
  int trials = 0;
  int repetitions = 0;
  int threads = 0;
};

ExperimentSpec resolve_spec(const RunArgs& a) {
  ExperimentSpec spec = a.config.empty() ? ExperimentSpec{} : load_spec(a.config);
  if (a.seed >= 0) spec.network.seed = static_cast<std::uint64_t>(a.seed);
  if (a.trials > 0) spec.trials = a.trials;
  if (a.repetitions > 0) spec.repetitions = a.repetitions;
  if (a.threads > 0) spec.threads = a.threads;
  if (!a.out.empty()) spec.output_dir = a.out;
  if (!a.schemes.empty()) {
    spec.schemes.clear();
    for (const auto& s : split_list(a.schemes)) spec.schemes.push_back(pilot_scheme_from_string(s));
  }
  if (!a.theta.empty()) {
    spec.theta_values.clear();
    for (const auto& s : split_list(a.theta)) spec.theta_values.push_back(std::stod(s));
  }
  spec.validate();
  return spec;
}

ResultStore load_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open results: " + path);
  return read_results_csv(in);
}

int cmd_run(const RunArgs& a) {
  const ExperimentSpec spec = resolve_spec(a);
  ResultStore store = run_experiment(spec);
  store.config_hash = config_hash(spec);
  write_outputs(store, spec.output_dir, split_list(a.group_by));
  {
    std::ofstream cfg(std::filesystem::path(spec.output_dir) / "config.json");
    cfg << to_json(spec).dump(2) << '\n';
  }
  int failed = 0;
  for (const auto& d : store.drops) failed += d.ok ? 0 : 1;
  std::cout << "wrote " << store.rows.size() << " rows to " << spec.output_dir << " (config "
            << store.config_hash << ", " << failed << " aborted drops)\n";
  if (!store.rows.empty()) {
    for (const auto& g : summarize(store, split_list(a.group_by))) {
      std::printf("%-48s avg %.4f  95%%-likely %.4f  spread %.4f\n", g.group.c_str(),
                  g.summary.average, g.summary.percentile_5, g.summary.max_minus_min);
    }
  }
  return failed == spec.repetitions ? 1 : 0;
}

int cmd_summarize(const std::string& results, const std::string& group_by, bool per_drop) {
  const ResultStore store = load_results(results);
  std::cout << summary_json(store, split_list(group_by), per_drop).dump(2) << '\n';
  return 0;
}

int cmd_cdf(const std::string& results, const std::string& group_by, const std::string& out) {
  const ResultStore store = load_results(results);
  std::filesystem::create_directories(out);
  for (const auto& [key, curve] : export_cdf(store, split_list(group_by))) {
    const auto path = std::filesystem::path(out) / ("cdf_" + sanitize_label(key) + ".csv");
    std::ofstream f(path);
    write_cdf_csv(curve, f);
    std::cout << path.string() << '\n';
  }
  return 0;
}

int cmd_complexity(const RunArgs& a, int m) {
  const ExperimentSpec spec = resolve_spec(a);
  const int K = spec.network.K;
  const int L = spec.network.L;
  std::cout << "online pilot-assignment operations (K=" << K << ", L=" << L
            << ", tau_p=" << spec.tau_p << ")\n";
  for (PilotScheme s : {PilotScheme::random, PilotScheme::switching, PilotScheme::gb_km,
                        PilotScheme::ib_km, PilotScheme::user_group}) {
    const ComplexityReport r = online_complexity_report(s, K, L, spec.tau_p);
    std::printf("  %-12s %14.0f  %s\n", to_string(s).c_str(), r.operations, r.formula.c_str());
  }
  if (m > 0) {
    const FronthaulComplexity c = lsfd_cost(m, K);
    std::printf("LSFD statistics per UE with |M_k|=%d, K=%d: fronthaul %.0f scalars, %.0f mults\n",
                m, K, c.fronthaul_scalars, c.complexity_mults);
  }
  NetworkConfig cfg = spec.network;
  cfg.seed = drop_seed(spec.network.seed, 0);
  const NetworkRealization net = generate_network(cfg);
  const ServiceMap map = initial_access(net.beta, spec.tau_p);
  for (bool partial : {false, true}) {
    const auto rows = fronthaul_complexity(map, K, spec.tau_p, partial);
    double f = 0.0;
    double c = 0.0;
    for (const auto& r : rows) {
      f += r.fronthaul_scalars;
      c += r.complexity_mults;
    }
    std::printf("%-7s mean per UE on drop 0: fronthaul %.1f scalars, %.1f mults\n",
                partial ? "P-LSFD" : "LSFD", f / K, c / K);
  }
  return 0;
}

// Closed forms against Monte-Carlo on one drop; nonzero exit beyond tolerance.
int cmd_validate(const RunArgs& a, double tolerance) {
  ExperimentSpec spec = resolve_spec(a);
  NetworkConfig cfg = spec.network;
  cfg.seed = drop_seed(spec.network.seed, 0);
  const NetworkRealization net = generate_network(cfg);
  const ServiceMap map = initial_access(net.beta, spec.tau_p);
  const double pre = prelog(spec.tau_p, spec.tau_c);
  const std::vector<double> pilot(static_cast<std::size_t>(net.K), spec.p_bar);
  const PowerPolicy pol = fractional_power(net.beta, map, spec.theta_values.front(), spec.p_bar);
  const TransmitPowers powers{pilot, pol.powers};
  const std::uint64_t mc_seed = derive_seed(cfg.seed, Stream::decoding);
  int bad = 0;

  auto compare = [&](const char* name, const DecodingStats& closed, const DecodingStats& mc) {
    const auto w = lsfd_weights(closed, powers.data, net.noise_power, true, map.P);
    const SeResult cf = se_monte_carlo(closed, w, powers.data, net.noise_power, pre);
    const SeResult sim = se_monte_carlo(mc, w, powers.data, net.noise_power, pre);
    double worst = 0.0;
    for (std::size_t k = 0; k < cf.se.size(); ++k)
      worst = std::max(worst, std::abs(sim.se[k] - cf.se[k]) / cf.se[k]);
    const bool ok = worst <= tolerance;
    bad += ok ? 0 : 1;
    std::printf("%-24s max relative SE gap %.4f  [%s]\n", name, worst, ok ? "ok" : "FAIL");
  };

  const PilotPlan plan = assign_random(net.K, spec.tau_p, derive_seed(cfg.seed, Stream::pilot_plan));
  compare("MR, fixed pilots", closed_form_mr_stats(net, map, plan, pilot, net.noise_power),
          simulate_decoding_stats(net, map, plan, CombinerKind::mr, powers, spec.trials, mc_seed));
  const PilotPlan sw = assign_switching(net.K, spec.tau_p, 0);
  compare("MR_normalized, switching",
          closed_form_switching_stats(net, map, spec.tau_p, pilot, net.noise_power),
          simulate_decoding_stats(net, map, sw, CombinerKind::mr_normalized, powers, spec.trials,
                                  mc_seed));
  return bad == 0 ? 0 : 2;
}

void add_common(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--config", a.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", a.seed, "Experiment seed");
  cmd->add_option("--trials", a.trials, "Monte-Carlo trials per drop");
  cmd->add_option("--schemes", a.schemes, "Comma-separated pilot schemes");
  cmd->add_option("--theta", a.theta, "Comma-separated power-control exponents");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell-free massive MIMO uplink simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run an experiment and write results");
  add_common(run, run_args);
  run->add_option("--out", run_args.out, "Output directory");
  run->add_option("--repetitions", run_args.repetitions, "Number of network drops");
  run->add_option("--threads", run_args.threads, "Drops evaluated concurrently");
  run->add_option("--group-by", run_args.group_by, "Summary/CDF grouping columns");

  std::string results;
  std::string group_by = "scheme,combiner,decoder,theta";
  bool per_drop = false;
  auto* summ = app.add_subcommand("summarize", "Summarize a results.csv");
  summ->add_option("results", results, "results.csv")->required()->check(CLI::ExistingFile);
  summ->add_option("--group-by", group_by, "Grouping columns");
  summ->add_flag("--per-drop", per_drop, "Average per-drop statistics instead of pooling");

  std::string cdf_out = ".";
  auto* cdf = app.add_subcommand("cdf", "Export empirical CDFs from a results.csv");
  cdf->add_option("results", results, "results.csv")->required()->check(CLI::ExistingFile);
  cdf->add_option("--group-by", group_by, "Grouping columns");
  cdf->add_option("--out", cdf_out, "Output directory");

  RunArgs cx_args;
  int m = 0;
  auto* cx = app.add_subcommand("complexity", "Pilot-assignment and LSFD cost reports");
  add_common(cx, cx_args);
  cx->add_option("--M", m, "Serving-set size for the per-UE LSFD formula");

  RunArgs val_args;
  double tolerance = 0.03;
  auto* val = app.add_subcommand("validate", "Closed forms against Monte-Carlo on one drop");
  add_common(val, val_args);
  val->add_option("--tolerance", tolerance, "Allowed max relative SE gap");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run(run_args);
    if (summ->parsed()) return cmd_summarize(results, group_by, per_drop);
    if (cdf->parsed()) return cmd_cdf(results, group_by, cdf_out);
    if (cx->parsed()) return cmd_complexity(cx_args, m);
    if (val->parsed()) return cmd_validate(val_args, tolerance);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
