// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/netgen.hpp"

#include "cfmimo/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cfmimo {

std::string to_string(Deployment d) {
  return d == Deployment::grid ? "grid" : "uniform_random";
}

Deployment deployment_from_string(const std::string& s) {
  if (s == "grid") return Deployment::grid;
  if (s == "uniform_random" || s == "random") return Deployment::uniform_random;
  throw std::invalid_argument("unknown deployment: " + s);
}

std::string to_string(CorrelationModel c) {
  return c == CorrelationModel::local_scattering ? "local_scattering" : "uncorrelated";
}

CorrelationModel correlation_from_string(const std::string& s) {
  if (s == "local_scattering") return CorrelationModel::local_scattering;
  if (s == "uncorrelated") return CorrelationModel::uncorrelated;
  throw std::invalid_argument("unknown correlation model: " + s);
}

void NetworkConfig::validate() const {
  if (L < 1) throw std::invalid_argument("L must be >= 1");
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  if (!(side_length > 0.0)) throw std::invalid_argument("side_length must be > 0");
  if (!(min_distance > 0.0)) throw std::invalid_argument("min_distance must be > 0");
  if (correlation == CorrelationModel::local_scattering && !(asd_degrees > 0.0))
    throw std::invalid_argument("asd_degrees must be > 0");
  if (deployment == Deployment::grid) {
    const int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(L))));
    if (root * root != L)
      throw std::invalid_argument("grid deployment requires L to be a perfect square, got " +
                                  std::to_string(L));
  }
}

Point wrap_offset(Point from, Point to, double side) {
  Point best{to.x - from.x, to.y - from.y};
  double best_d2 = best.x * best.x + best.y * best.y;
  for (int sx = -1; sx <= 1; ++sx) {
    for (int sy = -1; sy <= 1; ++sy) {
      const double dx = to.x + sx * side - from.x;
      const double dy = to.y + sy * side - from.y;
      const double d2 = dx * dx + dy * dy;
      if (d2 < best_d2) {
        best_d2 = d2;
        best = {dx, dy};
      }
    }
  }
  return best;
}

double wrap_distance(Point a, Point b, double side) {
  const Point o = wrap_offset(a, b, side);
  return std::hypot(o.x, o.y);
}

RVec ap_distance_vector(Point p, const std::vector<Point>& aps, double side) {
  RVec d(static_cast<Eigen::Index>(aps.size()));
  for (std::size_t l = 0; l < aps.size(); ++l)
    d(static_cast<Eigen::Index>(l)) = wrap_distance(p, aps[l], side);
  return d;
}

CMat local_scattering_R(double nominal_angle, double asd, double beta, int N) {
  using std::numbers::pi;
  CMat r(N, N);
  const double s = std::sin(nominal_angle);
  const double c = std::cos(nominal_angle);
  for (int m = 0; m < N; ++m) {
    for (int n = 0; n < N; ++n) {
      const double delta = static_cast<double>(m - n);
      const double spread = pi * delta * c;
      const double mag = beta * std::exp(-0.5 * asd * asd * spread * spread);
      r(m, n) = std::polar(mag, pi * delta * s);
    }
  }
  // Diagonal is already beta; rescale anyway so trace/N == beta exactly.
  const double tr = r.trace().real();
  if (tr > 0.0) r *= beta * N / tr;
  return r;
}

std::vector<Point> place_aps(const NetworkConfig& cfg) {
  std::vector<Point> aps;
  aps.reserve(static_cast<std::size_t>(cfg.L));
  if (cfg.deployment == Deployment::grid) {
    const int per_side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(cfg.L))));
    const double spacing = cfg.side_length / per_side;
    for (int ix = 0; ix < per_side; ++ix)
      for (int iy = 0; iy < per_side; ++iy)
        aps.push_back({(ix + 0.5) * spacing, (iy + 0.5) * spacing});
  } else {
    Rng rng(derive_seed(cfg.seed, Stream::ap_positions));
    for (int l = 0; l < cfg.L; ++l) {
      const double x = rng.uniform(0.0, cfg.side_length);
      const double y = rng.uniform(0.0, cfg.side_length);
      aps.push_back({x, y});
    }
  }
  return aps;
}

NetworkRealization generate_network(const NetworkConfig& cfg) {
  cfg.validate();
  NetworkRealization net;
  net.L = cfg.L;
  net.K = cfg.K;
  net.N = cfg.N;
  net.side_length = cfg.side_length;
  net.noise_power = dbm_to_watt(cfg.noise_power_dbm);
  net.ap_positions = place_aps(cfg);

  Rng ue_rng(derive_seed(cfg.seed, Stream::ue_positions));
  net.ue_positions.reserve(static_cast<std::size_t>(cfg.K));
  for (int k = 0; k < cfg.K; ++k) {
    const double x = ue_rng.uniform(0.0, cfg.side_length);
    const double y = ue_rng.uniform(0.0, cfg.side_length);
    net.ue_positions.push_back({x, y});
  }

  Rng shadow_rng(derive_seed(cfg.seed, Stream::shadowing));
  const double asd = cfg.asd_degrees * std::numbers::pi / 180.0;
  net.beta.resize(cfg.K, cfg.L);
  net.distances.resize(cfg.K, cfg.L);
  net.R.resize(static_cast<std::size_t>(cfg.K) * cfg.L);
  for (int k = 0; k < cfg.K; ++k) {
    for (int l = 0; l < cfg.L; ++l) {
      const Point off = wrap_offset(net.ap_positions[l], net.ue_positions[k], cfg.side_length);
      const double d = std::max(std::hypot(off.x, off.y), cfg.min_distance);
      const double beta_db = cfg.pathloss.intercept_db - cfg.pathloss.slope_db * std::log10(d) +
                             cfg.pathloss.shadow_std_db * shadow_rng.normal();
      const double beta = db_to_linear(beta_db);
      net.distances(k, l) = d;
      net.beta(k, l) = beta;
      CMat& r = net.R[static_cast<std::size_t>(k) * cfg.L + l];
      if (cfg.correlation == CorrelationModel::uncorrelated || cfg.N == 1) {
        r = CMat::Identity(cfg.N, cfg.N) * beta;
      } else {
        const double angle = std::atan2(off.y, off.x);
        r = local_scattering_R(angle, asd, beta, cfg.N);
      }
    }
  }
  return net;
}

}  // namespace cfmimo
