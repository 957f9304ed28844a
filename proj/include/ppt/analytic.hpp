// analytic.hpp - closed-form false-alarm / mis-detection / collision /
// success probabilities of the partial-preamble access protocol, plus
// constant-false-alarm threshold calibration.
//
// Normalization: per-symbol noise variance is 1 and snr_linear is the
// per-symbol SNR, so the accumulated statistic of a resource used by k
// devices follows Gamma(shape = m_partial,
// rate = m_partial / (k*P*(nu*xi)^2 + nu*xi)) and the noise-only mean is
// nu*xi. Thresholds in dB are relative to that noise-only mean: a resource
// is declared active when statistic/(nu*xi) > 10^(threshold_db/10).

#pragma once

#include <cmath>
#include <stdexcept>

#include "ppt/config.hpp"
#include "ppt/gamma.hpp"

namespace ppt {

/// The four protocol metrics at one operating point.
struct AnalyticMetrics {
  double p_fa = 0.0;
  double p_md = 0.0;
  double p_c = 0.0;
  double p_s = 0.0;
  double threshold_linear = 0.0;
};

/// Distribution of the per-resource detection statistic when k devices
/// transmit on it (k = 0 gives the noise-only law).
inline GammaLaw j_law(int k, const SystemConfig& cfg) {
  if (k < 0) throw std::domain_error("j_law requires k >= 0");
  const double nxi = static_cast<double>(cfg.symbols_per_basic_unit());
  const double mp = static_cast<double>(cfg.m_partial);
  const double variance_per_rep = k * cfg.snr_linear * nxi * nxi + nxi;
  return GammaLaw{mp, mp / variance_per_rep};
}

/// Probability that a noise-only resource exceeds the threshold.
/// Independent of nu*xi under the normalized-threshold convention:
/// p_fa = Q(m_p, m_p * tau) with tau = 10^(threshold_db/10).
inline double false_alarm_prob(double threshold_db, int m_p) {
  if (m_p < 1) throw std::domain_error("false_alarm_prob requires m_p >= 1");
  const double tau = std::pow(10.0, threshold_db / 10.0);
  if (std::isinf(tau)) return 0.0;
  return reg_upper_gamma(static_cast<double>(m_p), m_p * tau);
}

/// Threshold (dB, relative to the noise-only mean) that makes the
/// false-alarm probability equal target_pfa.
inline double calibrate_threshold(double target_pfa, int m_p) {
  if (m_p < 1) throw std::domain_error("calibrate_threshold requires m_p >= 1");
  const double x = inv_reg_upper_gamma(static_cast<double>(m_p), target_pfa);
  return 10.0 * std::log10(x / m_p);
}

/// Binomial probability that exactly k of the n_devices pick one tagged
/// resource out of the n_preambles * g available.
inline double occupancy_pmf(int k, const SystemConfig& cfg) {
  if (k < 0 || k > cfg.n_devices) {
    throw std::domain_error("occupancy_pmf requires 0 <= k <= n_devices");
  }
  const int n = cfg.n_devices;
  const int resources = cfg.n_resources();
  if (resources == 1) return k == n ? 1.0 : 0.0;
  const double p = 1.0 / resources;
  if (k == 0) return std::pow(1.0 - p, n);
  const double log_choose = log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
  return std::exp(log_choose + k * std::log(p) + (n - k) * std::log1p(-p));
}

/// Probability that an active resource stays below the threshold,
/// averaged over the occupancy distribution conditioned on >= 1 device
/// (the k = 0 mass is dropped and the rest renormalized by 1 - p_0). The
/// occupancy sum is truncated once the remaining binomial tail mass drops
/// under 1e-12.
inline double misdetection_prob(double threshold_db, const SystemConfig& cfg) {
  if (cfg.n_devices < 1) {
    throw std::domain_error("misdetection_prob undefined for n_devices = 0");
  }
  const double tau = std::pow(10.0, threshold_db / 10.0);
  const double mp = static_cast<double>(cfg.m_partial);
  const double p_nxi = cfg.snr_linear * cfg.symbols_per_basic_unit();
  const int n = cfg.n_devices;
  const int resources = cfg.n_resources();

  const auto miss_given_k = [&](int k) {
    return reg_lower_gamma(mp, mp * tau / (1.0 + k * p_nxi));
  };

  if (resources == 1) {
    // All devices land on the single resource.
    return miss_given_k(n);
  }

  const double p = 1.0 / resources;
  const double ratio = p / (1.0 - p);
  double pmf = std::pow(1.0 - p, n);  // k = 0
  const double delta = 1.0 - pmf;
  double mass_seen = pmf;
  double acc = 0.0;
  for (int k = 1; k <= n; ++k) {
    pmf *= ratio * (n - k + 1) / static_cast<double>(k);
    acc += pmf * miss_given_k(k);
    mass_seen += pmf;
    if (1.0 - mass_seen < 1e-12) break;
  }
  return acc / delta;
}

/// Probability that a tagged device shares its resource with at least one
/// other device: 1 - (1 - 1/(n_preambles*g))^(n_devices - 1).
inline double collision_prob(const SystemConfig& cfg) {
  if (cfg.n_devices < 1) {
    throw std::domain_error("collision_prob requires n_devices >= 1");
  }
  const double p = 1.0 / cfg.n_resources();
  return 1.0 - std::pow(1.0 - p, cfg.n_devices - 1);
}

/// Bundles p_fa, p_md, p_c and the success probability
/// p_s = (1 - p_c)(1 - p_md) at the given threshold.
inline AnalyticMetrics success_prob(const SystemConfig& cfg, double threshold_db) {
  AnalyticMetrics m;
  m.threshold_linear = std::pow(10.0, threshold_db / 10.0);
  m.p_fa = false_alarm_prob(threshold_db, cfg.m_partial);
  m.p_md = misdetection_prob(threshold_db, cfg);
  m.p_c = collision_prob(cfg);
  m.p_s = (1.0 - m.p_c) * (1.0 - m.p_md);
  return m;
}

/// Same, at the threshold stored in the config.
inline AnalyticMetrics success_prob(const SystemConfig& cfg) {
  if (!std::isfinite(cfg.threshold_db)) {
    throw ConfigError("threshold_db is not set; supply one or calibrate first");
  }
  return success_prob(cfg, cfg.threshold_db);
}

}  // namespace ppt
