// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/access.hpp"
#include "cfmimo/harness.hpp"
#include "cfmimo/io.hpp"
#include "cfmimo/netgen.hpp"
#include "cfmimo/pilots.hpp"
#include "cfmimo/power.hpp"
#include "cfmimo/receiver.hpp"
#include "cfmimo/statistics.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace cfmimo;

namespace {

std::vector<std::pair<double, double>> positions(const std::vector<Point>& pts) {
  std::vector<std::pair<double, double>> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.emplace_back(p.x, p.y);
  return out;
}

ExperimentSpec spec_from_string(const std::string& text) {
  ExperimentSpec spec = spec_from_json(Json::parse(text));
  spec.validate();
  return spec;
}

}  // namespace

PYBIND11_MODULE(_cfmimo, m) {
  m.doc() = "Cell-free massive MIMO uplink simulator core.";

  py::class_<NetworkConfig>(m, "NetworkConfig")
      .def(py::init<>())
      .def_readwrite("L", &NetworkConfig::L)
      .def_readwrite("K", &NetworkConfig::K)
      .def_readwrite("N", &NetworkConfig::N)
      .def_readwrite("side_length", &NetworkConfig::side_length)
      .def_readwrite("asd_degrees", &NetworkConfig::asd_degrees)
      .def_readwrite("noise_power_dbm", &NetworkConfig::noise_power_dbm)
      .def_readwrite("seed", &NetworkConfig::seed)
      .def("validate", &NetworkConfig::validate);

  py::class_<NetworkRealization>(m, "Network")
      .def_readonly("L", &NetworkRealization::L)
      .def_readonly("K", &NetworkRealization::K)
      .def_readonly("N", &NetworkRealization::N)
      .def_readonly("noise_power", &NetworkRealization::noise_power)
      .def_readonly("beta", &NetworkRealization::beta)
      .def_readonly("distances", &NetworkRealization::distances)
      .def_property_readonly("ap_positions",
                             [](const NetworkRealization& n) { return positions(n.ap_positions); })
      .def_property_readonly("ue_positions",
                             [](const NetworkRealization& n) { return positions(n.ue_positions); })
      .def("corr", &NetworkRealization::corr, py::arg("k"), py::arg("l"));

  m.def("generate_network", &generate_network, py::arg("config"));

  py::class_<ServiceMap>(m, "ServiceMap")
      .def_readonly("L", &ServiceMap::L)
      .def_readonly("K", &ServiceMap::K)
      .def_readonly("tau_p", &ServiceMap::tau_p)
      .def_readonly("M", &ServiceMap::M)
      .def_readonly("D", &ServiceMap::D)
      .def_readonly("P", &ServiceMap::P)
      .def_static("from_serving_sets", &ServiceMap::from_serving_sets, py::arg("L"), py::arg("K"),
                  py::arg("tau_p"), py::arg("serving"))
      .def("check_invariants", &ServiceMap::check_invariants);

  m.def("initial_access", &initial_access, py::arg("beta"), py::arg("tau_p"),
        py::arg("allow_overload") = false);

  py::enum_<PilotScheme>(m, "PilotScheme")
      .value("random", PilotScheme::random)
      .value("switching", PilotScheme::switching)
      .value("gb_km", PilotScheme::gb_km)
      .value("ib_km", PilotScheme::ib_km)
      .value("user_group", PilotScheme::user_group);

  py::class_<PilotPlan>(m, "PilotPlan")
      .def_readonly("tau_p", &PilotPlan::tau_p)
      .def_readonly("scheme", &PilotPlan::scheme)
      .def_readonly("switching", &PilotPlan::switching)
      .def_readonly("t", &PilotPlan::t)
      .def_readonly("S", &PilotPlan::S)
      .def_readonly("delta", &PilotPlan::delta)
      .def_readonly("constraint_violations", &PilotPlan::constraint_violations);

  py::class_<KMeansOptions>(m, "KMeansOptions")
      .def(py::init<>())
      .def_readwrite("training_points", &KMeansOptions::training_points)
      .def_readwrite("epsilon", &KMeansOptions::epsilon)
      .def_readwrite("max_iterations", &KMeansOptions::max_iterations)
      .def_readwrite("seed", &KMeansOptions::seed);

  m.def("assign_random", &assign_random, py::arg("K"), py::arg("tau_p"), py::arg("seed"));
  m.def("assign_switching", &assign_switching, py::arg("K"), py::arg("tau_p"),
        py::arg("block_seed"));
  m.def("assign_gb_km",
        [](const NetworkRealization& net, int tau_p, const KMeansOptions& opts) {
          return assign_gb_km(net.ue_positions, net.side_length, tau_p, opts);
        },
        py::arg("net"), py::arg("tau_p"), py::arg("options") = KMeansOptions{});
  m.def("assign_ib_km", &assign_ib_km, py::arg("net"), py::arg("map"), py::arg("tau_p"),
        py::arg("options") = KMeansOptions{});
  m.def("assign_user_group",
        [](const RMat& beta, const ServiceMap& map, int tau_p, std::optional<double> delta0) {
          UserGroupOptions opts;
          opts.delta0 = delta0;
          return assign_user_group(beta, map, tau_p, opts);
        },
        py::arg("beta"), py::arg("map"), py::arg("tau_p"), py::arg("delta0") = py::none());
  m.def("dis_metric",
        [](const std::vector<double>& d_i, const std::vector<double>& a_i,
           const std::vector<double>& d_k, const std::vector<double>& a_k) {
          return dis_metric(d_i, a_i, d_k, a_k);
        },
        py::arg("d_i"), py::arg("a_i"), py::arg("d_k"), py::arg("a_k"));

  m.def("fractional_power",
        [](const RMat& beta, const ServiceMap& map, double theta, double p_bar) {
          return fractional_power(beta, map, theta, p_bar).powers;
        },
        py::arg("beta"), py::arg("map"), py::arg("theta"), py::arg("p_bar"));

  py::enum_<CombinerKind>(m, "Combiner")
      .value("mr", CombinerKind::mr)
      .value("mr_normalized", CombinerKind::mr_normalized)
      .value("lp_mmse", CombinerKind::lp_mmse);
  py::enum_<Decoder>(m, "Decoder").value("lsfd", Decoder::lsfd).value("p_lsfd", Decoder::p_lsfd);

  m.def("prelog", &prelog, py::arg("tau_p"), py::arg("tau_c"));

  m.def("se_closed_form_mr",
        [](const NetworkRealization& net, const ServiceMap& map, const PilotPlan& plan,
           const std::vector<double>& pilot, const std::vector<double>& data, Decoder decoder,
           double prelog_factor) {
          return se_closed_form_mr(net, map, plan, {pilot, data}, net.noise_power, decoder,
                                   prelog_factor)
              .se;
        },
        py::arg("net"), py::arg("map"), py::arg("plan"), py::arg("pilot_powers"),
        py::arg("data_powers"), py::arg("decoder"), py::arg("prelog"));

  m.def("se_closed_form_switching",
        [](const NetworkRealization& net, const ServiceMap& map, int tau_p,
           const std::vector<double>& pilot, const std::vector<double>& data, Decoder decoder,
           double prelog_factor) {
          return se_closed_form_switching(net, map, tau_p, {pilot, data}, net.noise_power,
                                          decoder, prelog_factor)
              .se;
        },
        py::arg("net"), py::arg("map"), py::arg("tau_p"), py::arg("pilot_powers"),
        py::arg("data_powers"), py::arg("decoder"), py::arg("prelog"));

  m.def("se_monte_carlo",
        [](const NetworkRealization& net, const ServiceMap& map, const PilotPlan& plan,
           CombinerKind combiner, const std::vector<double>& pilot,
           const std::vector<double>& data, Decoder decoder, double prelog_factor, int trials,
           std::uint64_t seed) {
          const TransmitPowers powers{pilot, data};
          DecodingStats st;
          {
            py::gil_scoped_release release;
            st = simulate_decoding_stats(net, map, plan, combiner, powers, trials, seed);
          }
          const auto w =
              lsfd_weights(st, data, net.noise_power, decoder == Decoder::p_lsfd, map.P);
          return se_monte_carlo(st, w, data, net.noise_power, prelog_factor).se;
        },
        py::arg("net"), py::arg("map"), py::arg("plan"), py::arg("combiner"),
        py::arg("pilot_powers"), py::arg("data_powers"), py::arg("decoder"), py::arg("prelog"),
        py::arg("trials"), py::arg("seed"));

  m.def("lsfd_cost",
        [](int m_k, int n) {
          const FronthaulComplexity c = lsfd_cost(m_k, n);
          return std::make_pair(c.fronthaul_scalars, c.complexity_mults);
        },
        py::arg("m"), py::arg("n"));

  m.def("percentile_linear",
        [](const std::vector<double>& v, double q) { return percentile_linear(v, q); },
        py::arg("values"), py::arg("q"));

  m.def("run_experiment_json",
        [](const std::string& config) {
          const ExperimentSpec spec = spec_from_string(config);
          ResultStore store;
          {
            py::gil_scoped_release release;
            store = run_experiment(spec);
          }
          store.config_hash = config_hash(spec);
          py::dict cols;
          std::vector<int> drop, ue;
          std::vector<std::string> scheme, combiner, decoder;
          std::vector<double> theta, se;
          for (const auto& r : store.rows) {
            drop.push_back(r.drop);
            ue.push_back(r.ue);
            scheme.push_back(to_string(r.scheme));
            combiner.push_back(to_string(r.combiner));
            decoder.push_back(to_string(r.decoder));
            theta.push_back(r.theta);
            se.push_back(r.se);
          }
          cols["drop"] = drop;
          cols["ue"] = ue;
          cols["scheme"] = scheme;
          cols["combiner"] = combiner;
          cols["decoder"] = decoder;
          cols["theta"] = theta;
          cols["se"] = se;
          cols["config_hash"] = store.config_hash;
          return cols;
        },
        py::arg("config"),
        "Runs an experiment described by a JSON config; returns result columns.");
}
