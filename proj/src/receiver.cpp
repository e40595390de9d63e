// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/receiver.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace cfmimo {

std::string to_string(CombinerKind c) {
  switch (c) {
    case CombinerKind::mr: return "MR";
    case CombinerKind::mr_normalized: return "MR_normalized";
    case CombinerKind::lp_mmse: return "LP-MMSE";
  }
  return "?";
}

std::string to_string(Decoder d) { return d == Decoder::lsfd ? "LSFD" : "P-LSFD"; }

std::string to_string(SeMethod m) {
  switch (m) {
    case SeMethod::monte_carlo: return "monte_carlo";
    case SeMethod::closed_form_mr: return "closed_form_mr";
    case SeMethod::closed_form_switching: return "closed_form_switching";
  }
  return "?";
}

namespace {

std::string normalized(std::string s) {
  for (auto& ch : s) {
    if (ch == '-') ch = '_';
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  return s;
}

// tr(A B) without forming the product.
cplx trace_product(const CMat& a, const CMat& b) { return (a.transpose().cwiseProduct(b)).sum(); }

}  // namespace

CombinerKind combiner_from_string(const std::string& s) {
  const std::string n = normalized(s);
  if (n == "mr") return CombinerKind::mr;
  if (n == "mr_normalized") return CombinerKind::mr_normalized;
  if (n == "lp_mmse") return CombinerKind::lp_mmse;
  throw std::invalid_argument("unknown combiner: " + s);
}

Decoder decoder_from_string(const std::string& s) {
  const std::string n = normalized(s);
  if (n == "lsfd") return Decoder::lsfd;
  if (n == "p_lsfd") return Decoder::p_lsfd;
  throw std::invalid_argument("unknown decoder: " + s);
}

// ---------------------------------------------------------------------------
// Local combining

LocalCombiner::LocalCombiner(CombinerKind kind, const ServiceMap& map,
                             const EstimationStats& stats,
                             const std::vector<double>& data_powers, double noise)
    : kind_(kind), map_(&map), N_(stats.N), powers_(data_powers) {
  if (static_cast<int>(data_powers.size()) != map.K)
    throw std::invalid_argument("data_powers size does not match K");
  const int L = map.L;
  slot_.resize(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    for (int k : map.D[l]) {
      const auto& m = map.M[k];
      slot_[l].push_back(static_cast<int>(std::lower_bound(m.begin(), m.end(), l) - m.begin()));
    }
  }
  if (kind == CombinerKind::mr_normalized) {
    b_inv_.resize(static_cast<std::size_t>(map.K) * L);
    for (int k = 0; k < map.K; ++k) {
      for (int l : map.M[k]) {
        bool reg = false;
        b_inv_[static_cast<std::size_t>(k) * L + l] = inverse_hermitian(stats.b(k, l), &reg);
        regularized_ += reg ? 1 : 0;
      }
    }
  } else if (kind == CombinerKind::lp_mmse) {
    base_.assign(static_cast<std::size_t>(L), CMat::Identity(N_, N_) * noise);
    for (int l = 0; l < L; ++l)
      for (int i : map.D[l]) base_[l] += powers_[i] * stats.c(i, l);
  }
}

void LocalCombiner::apply(std::span<const CVec> hhat, TrialCombiners& out) const {
  const ServiceMap& map = *map_;
  const int L = map.L;
  out.resize(static_cast<std::size_t>(map.K));
  for (int k = 0; k < map.K; ++k) out[k].resize(map.M[k].size());
  CMat z;
  CMat x;
  for (int l = 0; l < L; ++l) {
    const auto& d = map.D[l];
    if (d.empty()) continue;
    if (kind_ == CombinerKind::lp_mmse) {
      x.resize(N_, static_cast<Eigen::Index>(d.size()));
      z = base_[l];
      for (std::size_t j = 0; j < d.size(); ++j) {
        const CVec& e = hhat[static_cast<std::size_t>(d[j]) * L + l];
        x.col(static_cast<Eigen::Index>(j)) = e;
        z.noalias() += powers_[d[j]] * (e * e.adjoint());
      }
      const CMat sol = solve_hermitian(z, x);
      for (std::size_t j = 0; j < d.size(); ++j)
        out[d[j]][slot_[l][j]] = powers_[d[j]] * sol.col(static_cast<Eigen::Index>(j));
      continue;
    }
    for (std::size_t j = 0; j < d.size(); ++j) {
      const std::size_t idx = static_cast<std::size_t>(d[j]) * L + l;
      CVec& a = out[d[j]][slot_[l][j]];
      if (kind_ == CombinerKind::mr)
        a = hhat[idx];
      else
        a.noalias() = b_inv_[idx] * hhat[idx];
    }
  }
}

// ---------------------------------------------------------------------------
// Decoding statistics

CMat DecodingStats::lambda1(int k, int i) const {
  const CMat& p = lambda1_packed[k];
  const Eigen::Index m = p.rows();
  CMat out(m, m);
  for (Eigen::Index c = 0; c < m; ++c) out.col(c) = p.col(c * K + i);
  return out;
}

CMat DecodingStats::weighted_lambda1(int k, std::span<const double> c) const {
  const CMat& p = lambda1_packed[k];
  const Eigen::Index m = p.rows();
  const CVec cc = Eigen::Map<const RVec>(c.data(), K).cast<cplx>();
  CMat out(m, m);
  for (Eigen::Index col = 0; col < m; ++col) out.col(col).noalias() = p.middleCols(col * K, K) * cc;
  return out;
}

DecodingAccumulator::DecodingAccumulator(const ServiceMap& map) : map_(&map) {
  const int K = map.K;
  v_.resize(static_cast<std::size_t>(K));
  lambda1_.resize(static_cast<std::size_t>(K));
  lambda2_.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const auto m = static_cast<Eigen::Index>(map.M[k].size());
    v_[k] = CVec::Zero(m);
    lambda1_[k] = CMat::Zero(m, m * K);
    lambda2_[k] = RVec::Zero(m);
  }
}

void DecodingAccumulator::add_trial(const TrialCombiners& a, std::span<const CVec> h) {
  const ServiceMap& map = *map_;
  const int K = map.K;
  const int L = map.L;
  for (int k = 0; k < K; ++k) {
    const auto& mk = map.M[k];
    const auto m = static_cast<Eigen::Index>(mk.size());
    g_.resize(m, K);
    for (Eigen::Index s = 0; s < m; ++s) {
      const CVec& ak = a[k][s];
      const int l = mk[s];
      for (int i = 0; i < K; ++i) g_(s, i) = ak.dot(h[static_cast<std::size_t>(i) * L + l]);
      lambda2_[k](s) += ak.squaredNorm();
    }
    v_[k] += g_.col(k);
    for (Eigen::Index c = 0; c < m; ++c)
      lambda1_[k].middleCols(c * K, K).array() +=
          g_.array().rowwise() * g_.row(c).conjugate().array();
  }
  ++trials_;
}

void DecodingAccumulator::merge(const DecodingAccumulator& other) {
  if (other.map_->K != map_->K) throw std::invalid_argument("accumulators disagree on K");
  for (std::size_t k = 0; k < v_.size(); ++k) {
    v_[k] += other.v_[k];
    lambda1_[k] += other.lambda1_[k];
    lambda2_[k] += other.lambda2_[k];
  }
  trials_ += other.trials_;
}

DecodingStats DecodingAccumulator::finish() const {
  if (trials_ < 2) throw std::invalid_argument("decoding statistics need at least 2 trials");
  DecodingStats st;
  st.K = map_->K;
  st.serving = map_->M;
  st.trials = trials_;
  const double inv = 1.0 / trials_;
  st.v.reserve(v_.size());
  st.lambda1_packed.reserve(v_.size());
  st.lambda2.reserve(v_.size());
  for (std::size_t k = 0; k < v_.size(); ++k) {
    st.v.push_back(v_[k] * inv);
    st.lambda1_packed.push_back(lambda1_[k] * inv);
    st.lambda2.push_back(lambda2_[k] * inv);
  }
  return st;
}

std::vector<TrialCombiners> combine_local(CombinerKind kind, const ChannelBatch& batch,
                                          const std::vector<CVec>& estimates,
                                          const EstimationStats& stats, const ServiceMap& map,
                                          const std::vector<double>& data_powers, double noise) {
  if (estimates.size() != batch.h.size())
    throw std::invalid_argument("estimates and batch sizes differ");
  LocalCombiner comb(kind, map, stats, data_powers, noise);
  const std::size_t per = static_cast<std::size_t>(batch.K) * batch.L;
  std::vector<TrialCombiners> out(static_cast<std::size_t>(batch.trials));
  for (int t = 0; t < batch.trials; ++t)
    comb.apply(std::span<const CVec>(estimates.data() + per * t, per), out[t]);
  return out;
}

DecodingStats estimate_decoding_stats(const std::vector<TrialCombiners>& combiners,
                                      const ChannelBatch& batch, const ServiceMap& map) {
  if (static_cast<int>(combiners.size()) != batch.trials)
    throw std::invalid_argument("one combiner set per trial is required");
  DecodingAccumulator acc(map);
  for (int t = 0; t < batch.trials; ++t) acc.add_trial(combiners[t], batch.trial(t));
  return acc.finish();
}

DecodingStats simulate_decoding_stats(const NetworkRealization& net, const ServiceMap& map,
                                      const PilotPlan& plan, CombinerKind kind,
                                      const TransmitPowers& powers, int trials,
                                      std::uint64_t seed) {
  if (trials < 2) throw std::invalid_argument("trials must be >= 2");
  const double noise = net.noise_power;
  ChannelSampler sampler(net);
  DecodingAccumulator acc(map);
  std::vector<CVec> h;
  std::vector<CVec> hhat;
  TrialCombiners a;

  if (!plan.switching) {
    const EstimationStats stats = compute_estimation_stats(net, plan, powers.pilot, noise, &map);
    const LocalCombiner comb(kind, map, stats, powers.data, noise);
    for (int t = 0; t < trials; ++t) {
      sampler.draw(seed, t, h);
      estimate_trial(stats, plan, powers.pilot, noise, h, seed, t, hhat, &map);
      comb.apply(hhat, a);
      acc.add_trial(a, h);
    }
    return acc.finish();
  }
  for (int t = 0; t < trials; ++t) {
    const PilotPlan block = assign_switching(
        net.K, plan.tau_p,
        derive_seed(seed, Stream::switching_block, {static_cast<std::uint64_t>(t)}));
    const EstimationStats stats = compute_estimation_stats(net, block, powers.pilot, noise, &map);
    const LocalCombiner comb(kind, map, stats, powers.data, noise);
    sampler.draw(seed, t, h);
    estimate_trial(stats, block, powers.pilot, noise, h, seed, t, hhat, &map);
    comb.apply(hhat, a);
    acc.add_trial(a, h);
  }
  return acc.finish();
}

// ---------------------------------------------------------------------------
// LSFD and SINR

std::vector<CVec> lsfd_weights(const DecodingStats& stats, const std::vector<double>& powers,
                               double noise, bool partial,
                               const std::vector<std::vector<int>>& P, int* regularized) {
  const int K = stats.K;
  if (static_cast<int>(powers.size()) != K) throw std::invalid_argument("powers size mismatch");
  if (partial && static_cast<int>(P.size()) != K)
    throw std::invalid_argument("P-LSFD needs one interferer set per UE");
  std::vector<CVec> w(static_cast<std::size_t>(K));
  std::vector<double> c(static_cast<std::size_t>(K));
  int reg_count = 0;
  for (int k = 0; k < K; ++k) {
    if (partial) {
      std::fill(c.begin(), c.end(), 0.0);
      for (int i : P[k]) c[i] = powers[i];
    } else {
      c = powers;
    }
    CMat a = stats.weighted_lambda1(k, c);
    a.diagonal() += (noise * stats.lambda2[k]).cast<cplx>();
    make_hermitian(a);
    bool reg = false;
    w[k] = solve_hermitian(a, stats.v[k], &reg);
    if (reg) ++reg_count;
  }
  if (reg_count > 0 && regularized == nullptr)
    std::cerr << "warning: " << reg_count << " LSFD systems needed a ridge\n";
  if (regularized != nullptr) *regularized = reg_count;
  return w;
}

std::vector<double> sinr(const DecodingStats& stats, const std::vector<CVec>& weights,
                         const std::vector<double>& powers, double noise) {
  const int K = stats.K;
  if (static_cast<int>(weights.size()) != K || static_cast<int>(powers.size()) != K)
    throw std::invalid_argument("weights/powers size mismatch");
  const RVec p = Eigen::Map<const RVec>(powers.data(), K);
  std::vector<double> out(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const CVec& w = weights[k];
    const CMat& packed = stats.lambda1_packed[k];
    const Eigen::Index m = packed.rows();
    // q_i = w^H Lambda1_ki w, accumulated column block by column block.
    Eigen::RowVectorXcd q = Eigen::RowVectorXcd::Zero(K);
    for (Eigen::Index c = 0; c < m; ++c)
      q.noalias() += w(c) * (w.adjoint() * packed.middleCols(c * K, K));
    const double coherent = std::norm(w.dot(stats.v[k]));
    const double total = q.real().dot(p.transpose());
    const double noise_term = noise * (w.cwiseAbs2().dot(stats.lambda2[k]));
    const double denom = total - powers[k] * coherent + noise_term;
    out[k] = powers[k] * coherent / std::max(denom, std::numeric_limits<double>::min());
  }
  return out;
}

double prelog(int tau_p, int tau_c) {
  if (tau_p < 1 || tau_c <= tau_p) throw std::invalid_argument("need 1 <= tau_p < tau_c");
  return 1.0 - static_cast<double>(tau_p) / tau_c;
}

namespace {

SeResult se_from_sinr(const std::vector<double>& s, double prelog_factor, SeMethod method) {
  if (!(prelog_factor > 0.0 && prelog_factor < 1.0))
    throw std::invalid_argument("prelog must be in (0, 1)");
  SeResult r;
  r.method = method;
  r.prelog = prelog_factor;
  r.se.resize(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) r.se[k] = prelog_factor * std::log2(1.0 + s[k]);
  if (!r.se.empty()) r.summary = summarize_values(r.se);
  return r;
}

DecodingStats empty_stats(const ServiceMap& map) {
  DecodingStats st;
  st.K = map.K;
  st.serving = map.M;
  st.v.resize(static_cast<std::size_t>(map.K));
  st.lambda1_packed.resize(static_cast<std::size_t>(map.K));
  st.lambda2.resize(static_cast<std::size_t>(map.K));
  for (int k = 0; k < map.K; ++k) {
    const auto m = static_cast<Eigen::Index>(map.M[k].size());
    st.v[k] = CVec::Zero(m);
    st.lambda1_packed[k] = CMat::Zero(m, m * map.K);
    st.lambda2[k] = RVec::Zero(m);
  }
  return st;
}

// Adds diag(omega) + coef e e^H into the (k, i) block.
void add_block(DecodingStats& st, int k, int i, const RVec& omega, const CVec& e, double coef) {
  CMat& p = st.lambda1_packed[k];
  const Eigen::Index m = p.rows();
  for (Eigen::Index c = 0; c < m; ++c) {
    auto col = p.col(c * st.K + i);
    if (coef != 0.0) col += coef * std::conj(e(c)) * e;
    col(c) += omega(c);
  }
}

}  // namespace

SeResult se_monte_carlo(const DecodingStats& stats, const std::vector<CVec>& weights,
                        const std::vector<double>& powers, double noise, double prelog_factor) {
  return se_from_sinr(sinr(stats, weights, powers, noise), prelog_factor, SeMethod::monte_carlo);
}

// ---------------------------------------------------------------------------
// Closed forms

DecodingStats closed_form_mr_stats(const NetworkRealization& net, const ServiceMap& map,
                                   const PilotPlan& plan, const std::vector<double>& pilot_powers,
                                   double noise) {
  const EstimationStats es = compute_estimation_stats(net, plan, pilot_powers, noise, &map);
  const int K = net.K;
  DecodingStats st = empty_stats(map);
  for (int k = 0; k < K; ++k) {
    const auto& mk = map.M[k];
    const auto m = static_cast<Eigen::Index>(mk.size());
    for (Eigen::Index s = 0; s < m; ++s) {
      const double tr_b = es.b(k, mk[s]).trace().real();
      st.v[k](s) = tr_b;
      st.lambda2[k](s) = tr_b;
    }
    RVec omega(m);
    CVec e(m);
    for (int i = 0; i < K; ++i) {
      const bool shares = plan.t[i] == plan.t[k];
      const double amp = std::sqrt(plan.tau_p * pilot_powers[i]);
      for (Eigen::Index s = 0; s < m; ++s) {
        const int l = mk[s];
        const CMat& ri = net.corr(i, l);
        omega(s) = trace_product(es.b(k, l), ri).real();
        // E{hhat_kl^H h_il} = sqrt(tau_p p_i) tr(estimator^H R_il).
        if (shares) e(s) = amp * (es.est(k, l).conjugate().cwiseProduct(ri)).sum();
      }
      add_block(st, k, i, omega, e, shares ? 1.0 : 0.0);
    }
  }
  return st;
}

DecodingStats closed_form_switching_stats(const NetworkRealization& net, const ServiceMap& map,
                                          int tau_p, const std::vector<double>& pilot_powers,
                                          double noise) {
  if (tau_p < 1) throw std::invalid_argument("tau_p must be >= 1");
  const int K = net.K;
  const int L = net.L;
  const int N = net.N;
  if (static_cast<int>(pilot_powers.size()) != K)
    throw std::invalid_argument("pilot_powers size does not match K");
  // sum_i p_i R_il + noise I per AP.
  std::vector<CMat> total(static_cast<std::size_t>(L), CMat::Identity(N, N) * noise);
  for (int i = 0; i < K; ++i)
    for (int l = 0; l < L; ++l) total[l] += pilot_powers[i] * net.corr(i, l);

  DecodingStats st = empty_stats(map);
  int reg_count = 0;
  for (int k = 0; k < K; ++k) {
    const auto& mk = map.M[k];
    const auto m = static_cast<Eigen::Index>(mk.size());
    const double s_k = tau_p * pilot_powers[k];
    std::vector<CMat> r_inv(static_cast<std::size_t>(m));
    std::vector<CMat> b_bar_inv(static_cast<std::size_t>(m));
    for (Eigen::Index s = 0; s < m; ++s) {
      const int l = mk[s];
      const CMat& rk = net.corr(k, l);
      bool reg = false;
      r_inv[s] = inverse_hermitian(rk, &reg);
      reg_count += reg ? 1 : 0;
      // Pilot correlation averaged over uniformly redrawn pilots.
      const CMat psi_bar = total[l] + (tau_p - 1) * pilot_powers[k] * rk;
      CMat bi = r_inv[s] * psi_bar * r_inv[s] / s_k;
      make_hermitian(bi);
      b_bar_inv[s] = std::move(bi);
      st.v[k](s) = static_cast<double>(N);
      st.lambda2[k](s) = b_bar_inv[s].trace().real();
    }
    RVec omega(m);
    CVec e(m);
    for (int i = 0; i < K; ++i) {
      for (Eigen::Index s = 0; s < m; ++s) {
        const CMat& ri = net.corr(i, mk[s]);
        omega(s) = trace_product(b_bar_inv[s], ri).real();
        e(s) = i == k ? cplx(N, 0.0) : trace_product(r_inv[s], ri);
      }
      const double coef = i == k ? 1.0 : pilot_powers[i] / (tau_p * pilot_powers[k]);
      add_block(st, k, i, omega, e, coef);
    }
  }
  if (reg_count > 0)
    std::cerr << "warning: " << reg_count << " correlation matrices needed a ridge\n";
  return st;
}

SeResult se_closed_form_mr(const NetworkRealization& net, const ServiceMap& map,
                           const PilotPlan& plan, const TransmitPowers& powers, double noise,
                           const std::vector<CVec>& weights, double prelog_factor) {
  const DecodingStats st = closed_form_mr_stats(net, map, plan, powers.pilot, noise);
  return se_from_sinr(sinr(st, weights, powers.data, noise), prelog_factor,
                      SeMethod::closed_form_mr);
}

SeResult se_closed_form_mr(const NetworkRealization& net, const ServiceMap& map,
                           const PilotPlan& plan, const TransmitPowers& powers, double noise,
                           Decoder decoder, double prelog_factor) {
  const DecodingStats st = closed_form_mr_stats(net, map, plan, powers.pilot, noise);
  const auto w = lsfd_weights(st, powers.data, noise, decoder == Decoder::p_lsfd, map.P);
  return se_from_sinr(sinr(st, w, powers.data, noise), prelog_factor, SeMethod::closed_form_mr);
}

SeResult se_closed_form_switching(const NetworkRealization& net, const ServiceMap& map,
                                  int tau_p, const TransmitPowers& powers, double noise,
                                  const std::vector<CVec>& weights, double prelog_factor) {
  const DecodingStats st = closed_form_switching_stats(net, map, tau_p, powers.pilot, noise);
  return se_from_sinr(sinr(st, weights, powers.data, noise), prelog_factor,
                      SeMethod::closed_form_switching);
}

SeResult se_closed_form_switching(const NetworkRealization& net, const ServiceMap& map,
                                  int tau_p, const TransmitPowers& powers, double noise,
                                  Decoder decoder, double prelog_factor) {
  const DecodingStats st = closed_form_switching_stats(net, map, tau_p, powers.pilot, noise);
  const auto w = lsfd_weights(st, powers.data, noise, decoder == Decoder::p_lsfd, map.P);
  return se_from_sinr(sinr(st, w, powers.data, noise), prelog_factor,
                      SeMethod::closed_form_switching);
}

// ---------------------------------------------------------------------------
// Fronthaul and complexity

FronthaulComplexity lsfd_cost(int m, int n) {
  const double M = m;
  const double K = n;
  FronthaulComplexity c;
  c.fronthaul_scalars = K * M + (M * M * K * K + K * M) / 2.0;
  c.complexity_mults = ((M * M + M) / 2.0) * K + (M * M * M - M) / 3.0 + M * M;
  return c;
}

std::vector<FronthaulComplexity> fronthaul_complexity(const ServiceMap& map, int K, int tau_p,
                                                      bool partial) {
  (void)tau_p;
  std::vector<FronthaulComplexity> out;
  out.reserve(map.M.size());
  for (std::size_t k = 0; k < map.M.size(); ++k) {
    const int n = partial ? static_cast<int>(map.P[k].size()) : K;
    out.push_back(lsfd_cost(static_cast<int>(map.M[k].size()), n));
  }
  return out;
}

}  // namespace cfmimo
