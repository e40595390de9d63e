// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cfmimo {

double percentile_linear(std::span<const double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("percentile q must be in [0, 1]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

SeSummary summarize_values(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("cannot summarize an empty group");
  SeSummary s;
  s.count = values.size();
  s.average = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.percentile_5 = percentile_linear(values, 0.05);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.max_minus_min = *hi - *lo;
  return s;
}

}  // namespace cfmimo
