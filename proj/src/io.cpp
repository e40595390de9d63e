// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cfmimo {

namespace {

void reject_unknown(const Json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw std::invalid_argument(std::string(where) + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key))
      throw std::invalid_argument("unknown key '" + key + "' in " + where);
}

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Json points_json(const std::vector<Point>& pts) {
  Json a = Json::array();
  for (const auto& p : pts) a.push_back({p.x, p.y});
  return a;
}

Json matrix_json(const RMat& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(std::move(row));
  }
  return a;
}

std::string fmt(const char* f, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

}  // namespace

Json to_json(const NetworkConfig& cfg) {
  return Json{{"L", cfg.L},
              {"K", cfg.K},
              {"N", cfg.N},
              {"side_length", cfg.side_length},
              {"deployment", to_string(cfg.deployment)},
              {"pathloss",
               {{"intercept_db", cfg.pathloss.intercept_db},
                {"slope_db", cfg.pathloss.slope_db},
                {"shadow_std_db", cfg.pathloss.shadow_std_db}}},
              {"correlation", to_string(cfg.correlation)},
              {"asd_degrees", cfg.asd_degrees},
              {"noise_power_dbm", cfg.noise_power_dbm},
              {"min_distance", cfg.min_distance},
              {"seed", cfg.seed}};
}

NetworkConfig network_config_from_json(const Json& j, NetworkConfig cfg) {
  reject_unknown(j,
                 {"L", "K", "N", "side_length", "deployment", "pathloss", "correlation",
                  "asd_degrees", "noise_power_dbm", "min_distance", "seed"},
                 "network");
  read_opt(j, "L", cfg.L);
  read_opt(j, "K", cfg.K);
  read_opt(j, "N", cfg.N);
  read_opt(j, "side_length", cfg.side_length);
  if (j.contains("deployment")) cfg.deployment = deployment_from_string(j.at("deployment"));
  if (j.contains("pathloss")) {
    const Json& p = j.at("pathloss");
    reject_unknown(p, {"intercept_db", "slope_db", "shadow_std_db"}, "pathloss");
    read_opt(p, "intercept_db", cfg.pathloss.intercept_db);
    read_opt(p, "slope_db", cfg.pathloss.slope_db);
    read_opt(p, "shadow_std_db", cfg.pathloss.shadow_std_db);
  }
  if (j.contains("correlation")) cfg.correlation = correlation_from_string(j.at("correlation"));
  read_opt(j, "asd_degrees", cfg.asd_degrees);
  read_opt(j, "noise_power_dbm", cfg.noise_power_dbm);
  read_opt(j, "min_distance", cfg.min_distance);
  read_opt(j, "seed", cfg.seed);
  return cfg;
}

Json to_json(const ExperimentSpec& spec) {
  Json schemes = Json::array();
  for (auto s : spec.schemes) schemes.push_back(to_string(s));
  Json combiners = Json::array();
  for (auto c : spec.combiners) combiners.push_back(to_string(c));
  Json decoders = Json::array();
  for (auto d : spec.decoders) decoders.push_back(to_string(d));
  Json ug = {{"max_iterations", spec.user_group.max_iterations}};
  ug["delta0"] = spec.user_group.delta0 ? Json(*spec.user_group.delta0) : Json(nullptr);
  return Json{{"network", to_json(spec.network)},
              {"tau_p", spec.tau_p},
              {"tau_c", spec.tau_c},
              {"schemes", schemes},
              {"combiners", combiners},
              {"decoders", decoders},
              {"theta_values", spec.theta_values},
              {"trials", spec.trials},
              {"repetitions", spec.repetitions},
              {"p_bar", spec.p_bar},
              {"evaluation", to_string(spec.evaluation)},
              {"kmeans",
               {{"training_points", spec.kmeans.training_points},
                {"epsilon", spec.kmeans.epsilon},
                {"max_iterations", spec.kmeans.max_iterations}}},
              {"user_group", ug},
              {"output_dir", spec.output_dir},
              {"threads", spec.threads}};
}

ExperimentSpec spec_from_json(const Json& j) {
  reject_unknown(j,
                 {"network", "tau_p", "tau_c", "schemes", "combiners", "decoders",
                  "theta_values", "trials", "repetitions", "p_bar", "evaluation", "kmeans",
                  "user_group", "output_dir", "threads"},
                 "experiment");
  ExperimentSpec spec;
  if (j.contains("network")) spec.network = network_config_from_json(j.at("network"));
  read_opt(j, "tau_p", spec.tau_p);
  read_opt(j, "tau_c", spec.tau_c);
  if (j.contains("schemes")) {
    spec.schemes.clear();
    for (const auto& s : j.at("schemes")) spec.schemes.push_back(pilot_scheme_from_string(s));
  }
  if (j.contains("combiners")) {
    spec.combiners.clear();
    for (const auto& s : j.at("combiners")) spec.combiners.push_back(combiner_from_string(s));
  }
  if (j.contains("decoders")) {
    spec.decoders.clear();
    for (const auto& s : j.at("decoders")) spec.decoders.push_back(decoder_from_string(s));
  }
  read_opt(j, "theta_values", spec.theta_values);
  read_opt(j, "trials", spec.trials);
  read_opt(j, "repetitions", spec.repetitions);
  read_opt(j, "p_bar", spec.p_bar);
  if (j.contains("evaluation")) spec.evaluation = evaluation_from_string(j.at("evaluation"));
  if (j.contains("kmeans")) {
    const Json& k = j.at("kmeans");
    reject_unknown(k, {"training_points", "epsilon", "max_iterations"}, "kmeans");
    read_opt(k, "training_points", spec.kmeans.training_points);
    read_opt(k, "epsilon", spec.kmeans.epsilon);
    read_opt(k, "max_iterations", spec.kmeans.max_iterations);
  }
  if (j.contains("user_group")) {
    const Json& u = j.at("user_group");
    reject_unknown(u, {"delta0", "max_iterations"}, "user_group");
    if (u.contains("delta0") && !u.at("delta0").is_null())
      spec.user_group.delta0 = u.at("delta0").get<double>();
    read_opt(u, "max_iterations", spec.user_group.max_iterations);
  }
  read_opt(j, "output_dir", spec.output_dir);
  read_opt(j, "threads", spec.threads);
  return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument("malformed config " + path.string() + ": " + e.what());
  }
  return spec_from_json(j);
}

Json to_json(const NetworkRealization& net) {
  return Json{{"L", net.L},
              {"K", net.K},
              {"N", net.N},
              {"side_length", net.side_length},
              {"noise_power_w", net.noise_power},
              {"ap_positions", points_json(net.ap_positions)},
              {"ue_positions", points_json(net.ue_positions)},
              {"beta", matrix_json(net.beta)},
              {"distances", matrix_json(net.distances)}};
}

Json to_json(const ServiceMap& map) {
  return Json{{"L", map.L}, {"K", map.K}, {"tau_p", map.tau_p},
              {"M", map.M}, {"D", map.D}, {"P", map.P}};
}

Json to_json(const PilotPlan& plan) {
  return Json{{"tau_p", plan.tau_p},
              {"scheme", to_string(plan.scheme)},
              {"switching", plan.switching},
              {"t", plan.t},
              {"delta", plan.delta},
              {"constraint_violations", plan.constraint_violations}};
}

std::string config_hash(const ExperimentSpec& spec) {
  const std::string text = to_json(spec).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_results_csv(const ResultStore& store, std::ostream& out) {
  out << "drop,ue,scheme,combiner,decoder,theta,se_bits_per_hz\n";
  for (const auto& r : store.rows) {
    out << r.drop << ',' << r.ue << ',' << to_string(r.scheme) << ',' << to_string(r.combiner)
        << ',' << to_string(r.decoder) << ',' << fmt("%.10g", r.theta) << ','
        << fmt("%.17g", r.se) << '\n';
  }
}

ResultStore read_results_csv(std::istream& in) {
  ResultStore store;
  std::string line;
  if (!std::getline(in, line) || line != "drop,ue,scheme,combiner,decoder,theta,se_bits_per_hz")
    throw std::invalid_argument("results CSV header mismatch");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 7)
      throw std::invalid_argument("results CSV line " + std::to_string(lineno) + " malformed");
    ResultRow r;
    r.drop = std::stoi(f[0]);
    r.ue = std::stoi(f[1]);
    r.scheme = pilot_scheme_from_string(f[2]);
    r.combiner = combiner_from_string(f[3]);
    r.decoder = decoder_from_string(f[4]);
    r.theta = std::stod(f[5]);
    r.se = std::stod(f[6]);
    store.rows.push_back(r);
  }
  return store;
}

Json summary_json(const ResultStore& store, const std::vector<std::string>& group_by,
                  bool per_drop) {
  Json groups = Json::array();
  for (const auto& g : summarize(store, group_by, per_drop)) {
    groups.push_back({{"group", g.group},
                      {"average_se", g.summary.average},
                      {"se_95_likely", g.summary.percentile_5},
                      {"se_max_minus_min", g.summary.max_minus_min},
                      {"count", g.summary.count}});
  }
  Json drops = Json::array();
  for (const auto& d : store.drops) {
    Json v = Json::object();
    for (const auto& [k, n] : d.constraint_violations) v[k] = n;
    drops.push_back({{"drop", d.drop},
                     {"seed", d.seed},
                     {"ok", d.ok},
                     {"diagnostic", d.diagnostic},
                     {"constraint_violations", v}});
  }
  return Json{{"config_hash", store.config_hash},
              {"seed", store.seed},
              {"percentile", per_drop ? "per_drop" : "pooled"},
              {"group_by", group_by},
              {"groups", groups},
              {"drops", drops}};
}

void write_cdf_csv(const CdfCurve& curve, std::ostream& out) {
  out << "se,cdf\n";
  for (const auto& [se, p] : curve) out << fmt("%.17g", se) << ',' << fmt("%.17g", p) << '\n';
}

CdfCurve read_cdf_csv(std::istream& in) {
  CdfCurve curve;
  std::string line;
  if (!std::getline(in, line) || line != "se,cdf")
    throw std::invalid_argument("CDF CSV header mismatch");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("CDF CSV line malformed");
    curve.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  return curve;
}

std::string sanitize_label(const std::string& label) {
  std::string s;
  for (char c : label) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_')
      s += c;
    else
      s += '_';
  }
  return s;
}

void write_outputs(const ResultStore& store, const std::filesystem::path& dir,
                   const std::vector<std::string>& group_by) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "results.csv");
    write_results_csv(store, out);
  }
  if (store.rows.empty()) return;
  {
    std::ofstream out(dir / "summary.json");
    out << summary_json(store, group_by, false).dump(2) << '\n';
  }
  for (const auto& [key, curve] : export_cdf(store, group_by)) {
    std::ofstream out(dir / ("cdf_" + sanitize_label(key) + ".csv"));
    write_cdf_csv(curve, out);
  }
}

}  // namespace cfmimo
