// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

namespace cfmimo {

/// Percentile with linear interpolation between order statistics
/// (position q * (n - 1) in the sorted sample). q in [0, 1].
double percentile_linear(std::span<const double> values, double q);

/// Average, 95%-likely value (5th percentile) and max - min spread.
struct SeSummary {
  double average = 0.0;
  double percentile_5 = 0.0;
  double max_minus_min = 0.0;
  std::size_t count = 0;
};

SeSummary summarize_values(std::span<const double> values);

}  // namespace cfmimo
