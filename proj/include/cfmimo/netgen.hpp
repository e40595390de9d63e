// SPDX-License-Identifier: Apache-2.0
//
// Network geometry, large-scale fading and spatial correlation.

#pragma once

#include "cfmimo/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace cfmimo {

enum class Deployment { grid, uniform_random };
enum class CorrelationModel { local_scattering, uncorrelated };

std::string to_string(Deployment d);
Deployment deployment_from_string(const std::string& s);
std::string to_string(CorrelationModel c);
CorrelationModel correlation_from_string(const std::string& s);

/// beta[dB] = intercept - slope * log10(d / 1 m) + N(0, shadow_std^2).
struct PathlossModel {
  double intercept_db = -30.5;
  double slope_db = 36.7;
  double shadow_std_db = 4.0;
};

struct NetworkConfig {
  int L = 100;
  int K = 50;
  int N = 4;
  double side_length = 500.0;
  Deployment deployment = Deployment::grid;
  PathlossModel pathloss;
  CorrelationModel correlation = CorrelationModel::local_scattering;
  double asd_degrees = 15.0;
  double noise_power_dbm = -94.0;
  double min_distance = 1.0;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument on an invalid configuration.
  void validate() const;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

struct NetworkRealization {
  int L = 0;
  int K = 0;
  int N = 0;
  double side_length = 0.0;
  double noise_power = 0.0;  // watts
  std::vector<Point> ap_positions;
  std::vector<Point> ue_positions;
  RMat beta;       // K x L, linear gain
  RMat distances;  // K x L, meters, wrap-around minimum
  std::vector<CMat> R;  // index k * L + l

  const CMat& corr(int k, int l) const { return R[static_cast<std::size_t>(k) * L + l]; }
};

/// Offset (dx, dy) from `from` to the nearest of the 9 wrap-around images of `to`.
Point wrap_offset(Point from, Point to, double side);

/// Minimum distance over the 9 wrap-around images.
double wrap_distance(Point a, Point b, double side);

/// Wrap-around distances from `p` to every AP.
RVec ap_distance_vector(Point p, const std::vector<Point>& aps, double side);

/// Gaussian local scattering model for a half-wavelength ULA:
/// R(m,n) = beta * exp(j*pi*(m-n)*sin(angle)) * exp(-asd^2/2 * (pi*(m-n)*cos(angle))^2).
CMat local_scattering_R(double nominal_angle, double asd, double beta, int N);

NetworkRealization generate_network(const NetworkConfig& cfg);

/// AP coordinates only (grid or uniform), as used by generate_network.
std::vector<Point> place_aps(const NetworkConfig& cfg);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

}  // namespace cfmimo
