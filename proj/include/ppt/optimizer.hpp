// optimizer.hpp - Selection of the repetition count m_partial that
// maximizes the per-device success probability, with the false-alarm rate
// pinned to a target by per-candidate threshold calibration. Optional
// feasibility constraints and an optional simulation re-ranking pass for
// the top analytic candidates.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ppt/analytic.hpp"
#include "ppt/config.hpp"
#include "ppt/simulation.hpp"

namespace ppt {

/// Powers of two up to min(2^7, m_base), ascending. These are the
/// repetition counts the resource grid supports cleanly.
inline std::vector<int> candidate_repetitions(int m_base) {
  if (m_base < 1 || !is_power_of_two(m_base)) {
    throw ConfigError("m_base must be a power of two to enumerate candidates");
  }
  std::vector<int> out;
  for (int q = 0; q <= 7; ++q) {
    const int m = 1 << q;
    if (m > m_base) break;
    out.push_back(m);
  }
  return out;
}

/// One evaluated candidate. sim_p_s is populated only by re-ranking.
struct OptimizationRow {
  int m_p = 0;
  int g = 0;
  double threshold_db = 0.0;
  double p_fa = 0.0;
  double p_md = 0.0;
  double p_c = 0.0;
  double p_s = 0.0;
  std::optional<MetricEstimate> sim_p_s;
};

struct OptimizeOptions {
  std::optional<double> max_p_c;   ///< feasibility cap on collision probability
  std::optional<double> max_p_md;  ///< feasibility cap on misdetection probability
  bool sim_rerank = false;         ///< re-rank leading candidates by simulation
  int rerank_top = 3;
  std::uint64_t rerank_trials = 20000;
  std::uint64_t seed = 1;
  int n_workers = 1;
};

struct OptimizationReport {
  std::vector<OptimizationRow> rows;  ///< all candidates, ascending m_p
  int best_m_p = 0;
  std::size_t best_index = 0;
  bool sim_verified = false;  ///< true when sim re-ranking picked the winner
};

/// Evaluates every candidate repetition count against `tmpl` (its
/// m_partial and threshold_db are ignored), calibrating the detection
/// threshold to `target_pfa` for each. The winner maximizes p_s among
/// candidates meeting the optional caps; ties go to the larger m_p, which
/// has the better link budget. Throws ConfigError when no candidate is
/// feasible.
inline OptimizationReport optimize(const SystemConfig& tmpl, double target_pfa,
                                   const OptimizeOptions& opt = {}) {
  if (!(target_pfa > 0.0) || !(target_pfa < 1.0)) {
    throw std::domain_error("optimize requires target_pfa in (0, 1)");
  }

  OptimizationReport report;
  std::vector<SystemConfig> configs;
  for (int m_p : candidate_repetitions(tmpl.m_base)) {
    SystemConfig cfg = tmpl;
    cfg.m_partial = m_p;
    cfg.threshold_db = calibrate_threshold(target_pfa, m_p);
    cfg = validate(cfg);
    const AnalyticMetrics metrics = success_prob(cfg, cfg.threshold_db);

    OptimizationRow row;
    row.m_p = m_p;
    row.g = cfg.g;
    row.threshold_db = cfg.threshold_db;
    row.p_fa = metrics.p_fa;
    row.p_md = metrics.p_md;
    row.p_c = metrics.p_c;
    row.p_s = metrics.p_s;
    report.rows.push_back(row);
    configs.push_back(cfg);
  }

  bool any_feasible = false;
  double best_ps = -1.0;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    if (opt.max_p_c && row.p_c > *opt.max_p_c) continue;
    if (opt.max_p_md && row.p_md > *opt.max_p_md) continue;
    any_feasible = true;
    if (row.p_s >= best_ps) {  // >= : ties resolve to the larger m_p
      best_ps = row.p_s;
      report.best_index = i;
    }
  }
  if (!any_feasible) {
    throw ConfigError("no candidate repetition count satisfies the constraints");
  }

  if (opt.sim_rerank && tmpl.n_devices > 0) {
    // Order feasible candidates by analytic p_s and simulate the leaders.
    std::vector<std::size_t> feasible;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      const auto& row = report.rows[i];
      if (opt.max_p_c && row.p_c > *opt.max_p_c) continue;
      if (opt.max_p_md && row.p_md > *opt.max_p_md) continue;
      feasible.push_back(i);
    }
    std::sort(feasible.begin(), feasible.end(), [&](std::size_t a, std::size_t b) {
      const auto& ra = report.rows[a];
      const auto& rb = report.rows[b];
      return ra.p_s != rb.p_s ? ra.p_s > rb.p_s : ra.m_p > rb.m_p;
    });
    const std::size_t top = std::min<std::size_t>(
        feasible.size(), static_cast<std::size_t>(std::max(opt.rerank_top, 1)));

    double best_sim = -1.0;
    int best_sim_mp = -1;
    for (std::size_t rank = 0; rank < top; ++rank) {
      const std::size_t i = feasible[rank];
      EstimateOptions est;
      est.n_trials = opt.rerank_trials;
      est.seed = derive_seed(opt.seed, static_cast<std::uint64_t>(report.rows[i].m_p));
      est.n_workers = opt.n_workers;
      const SimulationMetrics sim = estimate_metrics(configs[i], est);
      report.rows[i].sim_p_s = sim.p_s;
      const bool better = sim.p_s.value > best_sim ||
                          (sim.p_s.value == best_sim && report.rows[i].m_p > best_sim_mp);
      if (better) {
        best_sim = sim.p_s.value;
        best_sim_mp = report.rows[i].m_p;
        report.best_index = i;
      }
    }
    report.sim_verified = true;
  }

  report.best_m_p = report.rows[report.best_index].m_p;
  return report;
}

}  // namespace ppt
