// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/power.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cfmimo {

std::vector<double> aggregate_gains(const RMat& beta, const ServiceMap& map) {
  std::vector<double> g(static_cast<std::size_t>(map.K), 0.0);
  for (int k = 0; k < map.K; ++k)
    for (int l : map.M[k]) g[k] += beta(k, l);
  return g;
}

PowerPolicy fractional_power(const RMat& beta, const ServiceMap& map, double theta, double p_bar) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must be in [0, 1]");
  if (!(p_bar > 0.0)) throw std::invalid_argument("p_bar must be positive");
  const std::vector<double> g = aggregate_gains(beta, map);
  for (int k = 0; k < map.K; ++k)
    if (map.M[k].empty() || !(g[k] > 0.0))
      throw std::invalid_argument("UE " + std::to_string(k) + " has no serving AP");

  PowerPolicy pol;
  pol.theta = theta;
  pol.p_bar = p_bar;
  const auto weakest = std::min_element(g.begin(), g.end());
  pol.eta = std::pow(*weakest, theta);
  pol.powers.resize(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) pol.powers[k] = p_bar * pol.eta / std::pow(g[k], theta);
  // Exact full power for the weakest UE, independent of pow() rounding.
  pol.powers[static_cast<std::size_t>(weakest - g.begin())] = p_bar;
  for (auto& p : pol.powers) p = std::min(p, p_bar);
  return pol;
}

std::vector<double> large_scale_sir(const RMat& beta, const ServiceMap& map,
                                    const std::vector<double>& powers) {
  const std::vector<double> g = aggregate_gains(beta, map);
  std::vector<double> sir(static_cast<std::size_t>(map.K));
  for (int k = 0; k < map.K; ++k) {
    double interference = 0.0;
    for (int i = 0; i < map.K; ++i) {
      if (i == k) continue;
      double overlap = 0.0;
      for (int l : map.M[k]) overlap += beta(k, l) * beta(i, l);
      interference += powers[i] * overlap;
    }
    sir[k] = interference > 0.0 ? powers[k] * g[k] * g[k] / interference
                                : std::numeric_limits<double>::infinity();
  }
  return sir;
}

}  // namespace cfmimo
