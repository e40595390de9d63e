// SPDX-License-Identifier: Apache-2.0
//
// Scalable fractional uplink power control.

#pragma once

#include "cfmimo/access.hpp"
#include "cfmimo/linalg.hpp"

#include <vector>

namespace cfmimo {

struct PowerPolicy {
  double theta = 0.0;
  double p_bar = 0.0;  // watts
  double eta = 1.0;
  std::vector<double> powers;  // watts
};

/// Sum of beta over the serving APs of every UE.
std::vector<double> aggregate_gains(const RMat& beta, const ServiceMap& map);

/// p_k = p_bar * eta / g_k^theta with g_k = sum_{l in M_k} beta_kl and
/// eta = min_i g_i^theta, so the weakest UE transmits at p_bar.
PowerPolicy fractional_power(const RMat& beta, const ServiceMap& map, double theta, double p_bar);

/// Large-scale SIR of every UE for the given powers; +inf when a UE sees no
/// interference (e.g. K = 1).
std::vector<double> large_scale_sir(const RMat& beta, const ServiceMap& map,
                                    const std::vector<double>& powers);

}  // namespace cfmimo
