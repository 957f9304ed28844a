// simulation.hpp - Monte Carlo simulation of contention sessions: random
// resource selection, block-fading channel, correlation detection
// statistic, per-partial-unit thresholding, and empirical metric
// estimation.
//
// Reproducibility contract: every trial draws from an RNG substream
// derived only from (master seed, trial index), and aggregation is a sum
// of counters, so results are bit-identical for a fixed seed regardless of
// worker count.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "ppt/analytic.hpp"
#include "ppt/config.hpp"

namespace ppt {

namespace detail {

// splitmix64 output function.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

// Circularly-symmetric complex normal with unit total variance.
inline std::complex<double> complex_normal(std::mt19937_64& eng,
                                           std::normal_distribution<double>& normal) {
  const double re = normal(eng);
  const double im = normal(eng);
  return {re * kInvSqrt2, im * kInvSqrt2};
}

inline const SystemConfig& require_simulation_ready(const SystemConfig& cfg) {
  if (cfg.g < 1 || cfg.g * cfg.m_partial != cfg.m_base) {
    throw ConfigError("config not validated; call validate() first");
  }
  return cfg;
}

}  // namespace detail

/// Deterministic per-index substream seed (splitmix64 sequence of `master`).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return detail::splitmix64_mix(master + (index + 1) * 0x9E3779B97F4A7C15ull);
}

/// Engine for one trial, depending only on (master seed, trial index).
inline std::mt19937_64 trial_rng(std::uint64_t master, std::uint64_t trial_index) {
  return std::mt19937_64(derive_seed(master, trial_index));
}

/// A probability estimate with its trial count and normal-approximation
/// 95% confidence half-width.
struct MetricEstimate {
  double value = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t trials = 0;
  double half_width_95 = std::numeric_limits<double>::quiet_NaN();

  static MetricEstimate from_counts(std::uint64_t events, std::uint64_t trials) {
    MetricEstimate e;
    e.trials = trials;
    if (trials > 0) {
      e.value = static_cast<double>(events) / static_cast<double>(trials);
      e.half_width_95 = 1.96 * std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(trials));
    }
    return e;
  }
};

/// Step 1: each device independently picks a uniform (preamble, partial
/// unit) pair out of the n_preambles * g resources.
inline std::vector<ContentionResource> draw_assignments(const SystemConfig& cfg,
                                                        std::mt19937_64& eng) {
  detail::require_simulation_ready(cfg);
  std::uniform_int_distribution<int> pick(0, cfg.n_resources() - 1);
  std::vector<ContentionResource> out;
  out.reserve(static_cast<std::size_t>(cfg.n_devices));
  for (int d = 0; d < cfg.n_devices; ++d) {
    out.push_back(resource_from_flat_index(pick(eng), cfg));
  }
  return out;
}

/// Detection statistic of a resource carrying k overlapping transmissions,
/// drawn at basic-unit granularity (the channel is constant within a basic
/// unit, so the nu*xi per-symbol correlations sum coherently). Returned
/// normalized by the noise-only mean nu*xi, ready to compare against the
/// linear threshold. noise_scale scales the additive noise; 0 skips the
/// noise draws entirely, making the result a function of the channel draws
/// alone.
inline double simulate_statistic_block(int k, const SystemConfig& cfg, std::mt19937_64& eng,
                                       double noise_scale = 1.0) {
  if (k < 0) throw std::domain_error("simulate_statistic_block requires k >= 0");
  const double nxi = static_cast<double>(cfg.symbols_per_basic_unit());
  const double amp = std::sqrt(cfg.snr_linear);
  std::normal_distribution<double> normal;
  double acc = 0.0;
  for (int m = 0; m < cfg.m_partial; ++m) {
    std::complex<double> sum_h{0.0, 0.0};
    for (int d = 0; d < k; ++d) {
      sum_h += detail::complex_normal(eng, normal);
    }
    std::complex<double> correlation = nxi * amp * sum_h;
    if (noise_scale != 0.0) {
      correlation += noise_scale * std::sqrt(nxi) * detail::complex_normal(eng, normal);
    }
    acc += std::norm(correlation);
  }
  return acc / (cfg.m_partial * nxi);
}

/// Reference path for the same statistic: builds every received symbol
/// (all transmitted symbols are 1), correlates per symbol, and accumulates
/// within each repetition. Distributionally identical to the block path.
inline double simulate_statistic_symbolwise(int k, const SystemConfig& cfg,
                                            std::mt19937_64& eng, double noise_scale = 1.0) {
  if (k < 0) throw std::domain_error("simulate_statistic_symbolwise requires k >= 0");
  const int nxi = cfg.symbols_per_basic_unit();
  const double amp = std::sqrt(cfg.snr_linear);
  std::normal_distribution<double> normal;
  double acc = 0.0;
  for (int m = 0; m < cfg.m_partial; ++m) {
    std::complex<double> signal{0.0, 0.0};
    for (int d = 0; d < k; ++d) {
      signal += amp * detail::complex_normal(eng, normal);
    }
    std::complex<double> rep_sum{0.0, 0.0};
    for (int s = 0; s < nxi; ++s) {
      std::complex<double> received = signal;
      if (noise_scale != 0.0) {
        received += noise_scale * detail::complex_normal(eng, normal);
      }
      rep_sum += received;  // r = y * conj(x), x = 1
    }
    acc += std::norm(rep_sum);
  }
  return acc / (static_cast<double>(cfg.m_partial) * nxi);
}

struct DeviceResult {
  ContentionResource resource;
  bool collided = false;
  bool detected = false;
  bool success = false;
};

/// Everything observed in one contention round.
struct SessionOutcome {
  std::vector<int> occupancy;           ///< devices per resource, by flat index
  std::vector<std::uint8_t> detected;   ///< threshold verdict per resource
  std::vector<DeviceResult> per_device;
  std::uint64_t false_alarms = 0;       ///< empty resources declared active
  std::uint64_t empty_evaluated = 0;    ///< noise-only statistics simulated
  std::uint64_t active_resources = 0;
  std::uint64_t missed_active = 0;      ///< active resources not detected
  std::uint64_t collided_devices = 0;
  std::uint64_t successes = 0;
};

struct SessionOptions {
  /// Upper bound on noise-only statistics simulated per session; 0 means
  /// evaluate every empty resource. Capping leaves the false-alarm
  /// estimator unbiased (occupancy is exchangeable across resources) but
  /// raises its variance.
  std::uint64_t max_empty_per_session = 0;
};

/// Steps 1-2 of one contention round: assign devices, simulate a
/// statistic per resource, threshold each. A device succeeds iff it is
/// alone on its resource and that resource is detected.
inline SessionOutcome run_session(const SystemConfig& cfg, std::mt19937_64& eng,
                                  const SessionOptions& opt = {}) {
  detail::require_simulation_ready(cfg);
  if (!(cfg.threshold_linear > 0.0)) {
    throw ConfigError("detection threshold is not set (threshold_db is NaN)");
  }
  const int resources = cfg.n_resources();

  SessionOutcome out;
  out.occupancy.assign(static_cast<std::size_t>(resources), 0);
  out.detected.assign(static_cast<std::size_t>(resources), 0);

  const auto assignments = draw_assignments(cfg, eng);
  for (const auto& r : assignments) {
    ++out.occupancy[static_cast<std::size_t>(resource_flat_index(r, cfg))];
  }

  for (int r = 0; r < resources; ++r) {
    const int k = out.occupancy[static_cast<std::size_t>(r)];
    if (k > 0) {
      const double statistic = simulate_statistic_block(k, cfg, eng);
      const bool det = statistic > cfg.threshold_linear;
      out.detected[static_cast<std::size_t>(r)] = det;
      ++out.active_resources;
      if (!det) ++out.missed_active;
    } else if (opt.max_empty_per_session == 0 ||
               out.empty_evaluated < opt.max_empty_per_session) {
      const double statistic = simulate_statistic_block(0, cfg, eng);
      const bool det = statistic > cfg.threshold_linear;
      out.detected[static_cast<std::size_t>(r)] = det;
      ++out.empty_evaluated;
      if (det) ++out.false_alarms;
    }
  }

  out.per_device.reserve(assignments.size());
  for (const auto& r : assignments) {
    const auto flat = static_cast<std::size_t>(resource_flat_index(r, cfg));
    DeviceResult dev;
    dev.resource = r;
    dev.collided = out.occupancy[flat] >= 2;
    dev.detected = out.detected[flat] != 0;
    dev.success = !dev.collided && dev.detected;
    if (dev.collided) ++out.collided_devices;
    if (dev.success) ++out.successes;
    out.per_device.push_back(dev);
  }
  return out;
}

struct EstimateOptions {
  std::uint64_t n_trials = 100000;
  std::uint64_t seed = 1;
  int n_workers = 1;
  std::uint64_t max_empty_per_session = 0;
};

/// Empirical protocol metrics over independent sessions.
struct SimulationMetrics {
  MetricEstimate p_fa;  ///< per evaluated empty resource
  MetricEstimate p_md;  ///< per active resource (conditioned on >= 1 device)
  MetricEstimate p_c;   ///< per device
  MetricEstimate p_s;   ///< per device
  std::uint64_t sessions = 0;
};

/// Aggregates run_session over opt.n_trials independent sessions.
/// Deterministic for a fixed seed, independent of n_workers.
inline SimulationMetrics estimate_metrics(const SystemConfig& cfg, const EstimateOptions& opt) {
  detail::require_simulation_ready(cfg);
  if (opt.n_trials < 1) throw std::invalid_argument("estimate_metrics requires n_trials >= 1");
  if (opt.n_workers < 1) throw std::invalid_argument("estimate_metrics requires n_workers >= 1");

  struct Tally {
    std::uint64_t false_alarms = 0, empty = 0, active = 0, missed = 0, collided = 0,
                  successes = 0;
    void operator+=(const SessionOutcome& s) {
      false_alarms += s.false_alarms;
      empty += s.empty_evaluated;
      active += s.active_resources;
      missed += s.missed_active;
      collided += s.collided_devices;
      successes += s.successes;
    }
  };

  const SessionOptions session_opt{opt.max_empty_per_session};
  const auto run_range = [&](std::uint64_t begin, std::uint64_t end, Tally& tally) {
    for (std::uint64_t trial = begin; trial < end; ++trial) {
      auto eng = trial_rng(opt.seed, trial);
      tally += run_session(cfg, eng, session_opt);
    }
  };

  const auto workers =
      static_cast<std::uint64_t>(std::min<std::uint64_t>(opt.n_workers, opt.n_trials));
  std::vector<Tally> tallies(workers);
  if (workers <= 1) {
    run_range(0, opt.n_trials, tallies[0]);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::uint64_t w = 0; w < workers; ++w) {
      const std::uint64_t begin = opt.n_trials * w / workers;
      const std::uint64_t end = opt.n_trials * (w + 1) / workers;
      pool.emplace_back(run_range, begin, end, std::ref(tallies[w]));
    }
    for (auto& t : pool) t.join();
  }

  Tally total;
  for (const auto& t : tallies) {
    total.false_alarms += t.false_alarms;
    total.empty += t.empty;
    total.active += t.active;
    total.missed += t.missed;
    total.collided += t.collided;
    total.successes += t.successes;
  }

  const std::uint64_t device_trials =
      static_cast<std::uint64_t>(cfg.n_devices) * opt.n_trials;
  SimulationMetrics m;
  m.p_fa = MetricEstimate::from_counts(total.false_alarms, total.empty);
  m.p_md = MetricEstimate::from_counts(total.missed, total.active);
  m.p_c = MetricEstimate::from_counts(total.collided, device_trials);
  m.p_s = MetricEstimate::from_counts(total.successes, device_trials);
  m.sessions = opt.n_trials;
  return m;
}

inline SimulationMetrics estimate_metrics(const SystemConfig& cfg, std::uint64_t n_trials,
                                          std::uint64_t seed) {
  EstimateOptions opt;
  opt.n_trials = n_trials;
  opt.seed = seed;
  return estimate_metrics(cfg, opt);
}

}  // namespace ppt
