// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace cfmimo {

ChannelSampler::ChannelSampler(const NetworkRealization& net)
    : K_(net.K), L_(net.L), N_(net.N), sqrt_r_(net.R.size()) {
  for (std::size_t n = 0; n < net.R.size(); ++n) sqrt_r_[n] = hermitian_sqrt(net.R[n]);
}

void ChannelSampler::draw(std::uint64_t seed, int trial, std::vector<CVec>& out) const {
  Rng rng(derive_seed(seed, Stream::channel, {static_cast<std::uint64_t>(trial)}));
  const std::size_t n = static_cast<std::size_t>(K_) * L_;
  out.resize(n);
  CVec z(N_);
  for (std::size_t idx = 0; idx < n; ++idx) {
    for (int a = 0; a < N_; ++a) z(a) = rng.complex_normal();
    out[idx].resize(N_);
    out[idx].noalias() = sqrt_r_[idx] * z;
  }
}

ChannelBatch draw_channels(const NetworkRealization& net, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  ChannelSampler sampler(net);
  ChannelBatch batch;
  batch.trials = trials;
  batch.K = net.K;
  batch.L = net.L;
  batch.N = net.N;
  batch.trial_seed_base = seed;
  const std::size_t per = static_cast<std::size_t>(net.K) * net.L;
  batch.h.resize(per * static_cast<std::size_t>(trials));
  std::vector<CVec> one;
  for (int t = 0; t < trials; ++t) {
    sampler.draw(seed, t, one);
    std::move(one.begin(), one.end(), batch.h.begin() + static_cast<std::ptrdiff_t>(per * t));
  }
  return batch;
}

EstimationStats compute_estimation_stats(const NetworkRealization& net, const PilotPlan& plan,
                                         const std::vector<double>& pilot_powers, double noise,
                                         const ServiceMap* served_only) {
  if (plan.K() != net.K) throw std::invalid_argument("pilot plan size does not match K");
  if (static_cast<int>(pilot_powers.size()) != net.K)
    throw std::invalid_argument("pilot_powers size does not match K");
  const int K = net.K;
  const int L = net.L;
  const int N = net.N;
  const int tau_p = plan.tau_p;
  EstimationStats st;
  st.tau_p = tau_p;
  st.K = K;
  st.L = L;
  st.N = N;
  st.Psi.assign(static_cast<std::size_t>(tau_p) * L, CMat::Identity(N, N) * noise);
  for (int k = 0; k < K; ++k) {
    const double scale = tau_p * pilot_powers[k];
    for (int l = 0; l < L; ++l)
      st.Psi[static_cast<std::size_t>(plan.t[k]) * L + l] += scale * net.corr(k, l);
  }
  const std::size_t kl = static_cast<std::size_t>(K) * L;
  st.B.resize(kl);
  st.C.resize(kl);
  st.estimator.resize(kl);
  for (int k = 0; k < K; ++k) {
    const double scale = tau_p * pilot_powers[k];
    for (int l = 0; l < L; ++l) {
      if (served_only != nullptr && !served_only->serves(l, k)) continue;
      const std::size_t idx = static_cast<std::size_t>(k) * L + l;
      const CMat& r = net.corr(k, l);
      // Psi^{-1} R via a Hermitian solve; B = tau_p p R Psi^{-1} R.
      const CMat psi_inv_r = solve_hermitian(st.psi(plan.t[k], l), r);
      CMat b = scale * r * psi_inv_r;
      make_hermitian(b);
      st.C[idx] = r - b;
      st.B[idx] = std::move(b);
      st.estimator[idx] = std::sqrt(scale) * psi_inv_r.adjoint();
    }
  }
  return st;
}

void estimate_trial(const EstimationStats& stats, const PilotPlan& plan,
                    const std::vector<double>& pilot_powers, double noise,
                    std::span<const CVec> h, std::uint64_t seed, int trial,
                    std::vector<CVec>& hhat, const ServiceMap* served_only) {
  const int K = stats.K;
  const int L = stats.L;
  const int N = stats.N;
  const int tau_p = stats.tau_p;
  Rng rng(derive_seed(seed, Stream::pilot_noise, {static_cast<std::uint64_t>(trial)}));
  const double noise_amp = std::sqrt(noise);
  std::vector<CVec> y(static_cast<std::size_t>(tau_p) * L, CVec(N));
  for (auto& v : y)
    for (int a = 0; a < N; ++a) v(a) = noise_amp * rng.complex_normal();
  for (int k = 0; k < K; ++k) {
    const double amp = std::sqrt(tau_p * pilot_powers[k]);
    for (int l = 0; l < L; ++l)
      y[static_cast<std::size_t>(plan.t[k]) * L + l] += amp * h[static_cast<std::size_t>(k) * L + l];
  }
  hhat.resize(static_cast<std::size_t>(K) * L);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      if (served_only != nullptr && !served_only->serves(l, k)) continue;
      CVec& out = hhat[static_cast<std::size_t>(k) * L + l];
      out.resize(N);
      out.noalias() = stats.est(k, l) * y[static_cast<std::size_t>(plan.t[k]) * L + l];
    }
  }
}

std::vector<CVec> estimate_channels(const ChannelBatch& batch, const EstimationStats& stats,
                                    const PilotPlan& plan,
                                    const std::vector<double>& pilot_powers, double noise,
                                    std::uint64_t seed) {
  if (batch.K != plan.K()) throw std::invalid_argument("batch and plan disagree on K");
  const std::size_t per = static_cast<std::size_t>(batch.K) * batch.L;
  std::vector<CVec> out(batch.h.size());
  std::vector<CVec> one;
  for (int t = 0; t < batch.trials; ++t) {
    estimate_trial(stats, plan, pilot_powers, noise, batch.trial(t), seed, t, one);
    std::move(one.begin(), one.end(), out.begin() + static_cast<std::ptrdiff_t>(per * t));
  }
  return out;
}

}  // namespace cfmimo
