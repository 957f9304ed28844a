// experiment.hpp - Experiment runner behind the CLI: evaluates one of the
// six modes against a system configuration and emits a CSV or JSON
// dataset. CSV is plot-ready; JSON additionally echoes the config, seed,
// and tool version. Output bytes depend only on (spec, seed), never on
// worker count or wall clock.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppt/analytic.hpp"
#include "ppt/config.hpp"
#include "ppt/optimizer.hpp"
#include "ppt/simulation.hpp"
#include "ppt/version.hpp"

namespace ppt {

/// Command-line / spec-level misuse (maps to exit code 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { analytic, simulate, optimize, sweep_threshold, sweep_mp, table2 };
enum class OutputFormat { csv, json };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::analytic: return "analytic";
    case Mode::simulate: return "simulate";
    case Mode::optimize: return "optimize";
    case Mode::sweep_threshold: return "sweep-threshold";
    case Mode::sweep_mp: return "sweep-mp";
    case Mode::table2: return "table2";
  }
  return "?";
}

struct ExperimentSpec {
  Mode mode = Mode::analytic;
  SystemConfig config{};
  double target_pfa = 1e-4;

  // sweep-threshold controls
  double sweep_start = -5.0;
  double sweep_stop = 15.0;
  double sweep_step = 0.5;
  std::vector<int> mp_list;         ///< series; empty = {16, 64}
  std::vector<double> snr_db_list;  ///< series; empty = {-10, -5}

  // simulation controls
  std::uint64_t trials = 0;  ///< 0 = analytic columns only
  int workers = 1;
  std::uint64_t max_empty_per_session = 0;

  // optimizer controls
  std::optional<double> max_p_c;
  std::optional<double> max_p_md;
  bool sim_rerank = false;
  int rerank_top = 3;

  std::string out_path;  ///< empty = stdout
  OutputFormat format = OutputFormat::csv;
};

namespace detail {

// One typed value so CSV formatting and JSON emission share the rows.
struct Cell {
  enum class Kind { empty, integer, prob, db } kind = Kind::empty;
  std::int64_t i = 0;
  double x = 0.0;

  static Cell none() { return {}; }
  static Cell integer(std::int64_t v) { return {Kind::integer, v, 0.0}; }
  static Cell prob(double v) { return {Kind::prob, 0, v}; }
  static Cell db(double v) { return {Kind::db, 0, v}; }
};

inline std::string format_cell(const Cell& c) {
  char buf[48];
  switch (c.kind) {
    case Cell::Kind::empty:
      return "";
    case Cell::Kind::integer:
      return std::to_string(c.i);
    case Cell::Kind::prob:  // 6 significant digits, scientific
      std::snprintf(buf, sizeof buf, "%.5e", c.x);
      return buf;
    case Cell::Kind::db:  // 3 decimals
      std::snprintf(buf, sizeof buf, "%.3f", c.x);
      return buf;
  }
  return "";
}

}  // namespace detail

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<detail::Cell>> rows;
};

inline void write_csv(const ResultTable& t, std::ostream& out) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) out << ',';
    out << t.columns[c];
  }
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << detail::format_cell(row[c]);
    }
    out << '\n';
  }
}

inline nlohmann::ordered_json to_json(const ExperimentSpec& spec, const ResultTable& t) {
  nlohmann::ordered_json j;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  j["mode"] = mode_name(spec.mode);
  j["seed"] = spec.config.seed;
  j["target_pfa"] = spec.target_pfa;
  j["trials"] = spec.trials;

  nlohmann::ordered_json cfg;
  cfg["xi"] = spec.config.xi;
  cfg["nu"] = spec.config.nu;
  cfg["n_preambles"] = spec.config.n_preambles;
  cfg["m_base"] = spec.config.m_base;
  cfg["m_partial"] = spec.config.m_partial;
  cfg["snr_db"] = spec.config.snr_db;
  cfg["n_devices"] = spec.config.n_devices;
  if (std::isfinite(spec.config.threshold_db)) {
    cfg["threshold_db"] = spec.config.threshold_db;
  } else {
    cfg["threshold_db"] = nullptr;
  }
  j["config"] = cfg;

  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const auto& cell = row[c];
      switch (cell.kind) {
        case detail::Cell::Kind::empty: r[t.columns[c]] = nullptr; break;
        case detail::Cell::Kind::integer: r[t.columns[c]] = cell.i; break;
        default: r[t.columns[c]] = cell.x; break;
      }
    }
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

namespace detail {

inline void push_estimate(std::vector<Cell>& row, const MetricEstimate& e) {
  row.push_back(Cell::prob(e.value));
  row.push_back(Cell::prob(e.half_width_95));
  row.push_back(Cell::integer(static_cast<std::int64_t>(e.trials)));
}

inline void push_estimate_columns(std::vector<std::string>& cols, const char* base) {
  cols.push_back(base);
  cols.push_back(std::string(base) + "_hw95");
  cols.push_back(std::string(base) + "_trials");
}

inline void push_all_estimate_columns(std::vector<std::string>& cols) {
  push_estimate_columns(cols, "sim_p_fa");
  push_estimate_columns(cols, "sim_p_md");
  push_estimate_columns(cols, "sim_p_c");
  push_estimate_columns(cols, "sim_p_s");
}

inline void push_all_estimates(std::vector<Cell>& row, const SimulationMetrics& sim) {
  push_estimate(row, sim.p_fa);
  push_estimate(row, sim.p_md);
  push_estimate(row, sim.p_c);
  push_estimate(row, sim.p_s);
}

// Helper shared by every mode that simulates sweep points. Warns (once per
// metric per run) when a metric's expected event count over the run is too
// small for a stable estimate.
struct SimRunner {
  const ExperimentSpec& spec;
  std::ostream& err;
  std::uint64_t point_index = 0;
  std::set<std::string> warned;

  SimulationMetrics run(const SystemConfig& cfg, const AnalyticMetrics& analytic) {
    warn_if_rare(cfg, analytic);
    EstimateOptions opt;
    opt.n_trials = spec.trials;
    opt.seed = derive_seed(spec.config.seed, point_index++);
    opt.n_workers = spec.workers;
    opt.max_empty_per_session = spec.max_empty_per_session;
    return estimate_metrics(cfg, opt);
  }

  void warn_if_rare(const SystemConfig& cfg, const AnalyticMetrics& analytic) {
    const double resources = cfg.n_resources();
    const double active = resources * (1.0 - std::pow(1.0 - 1.0 / resources, cfg.n_devices));
    const double empty =
        spec.max_empty_per_session > 0
            ? std::min<double>(static_cast<double>(spec.max_empty_per_session), resources - active)
            : resources - active;
    const double devices = cfg.n_devices;
    const double n = static_cast<double>(spec.trials);
    const struct {
      const char* name;
      double expected;
    } checks[] = {
        {"p_fa", analytic.p_fa * empty * n},
        {"p_md", analytic.p_md * active * n},
        {"p_c", analytic.p_c * devices * n},
        {"p_s", analytic.p_s * devices * n},
    };
    for (const auto& c : checks) {
      if (c.expected > 0.0 && c.expected < 100.0 && warned.insert(c.name).second) {
        err << "warning: expected " << c.name << " event count is about " << c.expected
            << " over " << spec.trials << " sessions; this estimate will be noisy\n";
      }
    }
  }
};

/// Base config for single-point modes: threshold calibrated to the target
/// false-alarm rate unless one was given.
inline SystemConfig prepared_point_config(const ExperimentSpec& spec) {
  SystemConfig cfg = spec.config;
  if (cfg.n_devices < 1) {
    throw ConfigError("this mode requires n_devices >= 1");
  }
  if (!std::isfinite(cfg.threshold_db)) {
    cfg.threshold_db = calibrate_threshold(spec.target_pfa, cfg.m_partial);
  }
  return validate(cfg);
}

inline void push_point_columns(std::vector<std::string>& cols) {
  cols.insert(cols.end(), {"n_m", "snr_db", "m_p", "g", "threshold_db", "p_fa", "p_md", "p_c",
                           "p_s"});
}

inline void push_point(std::vector<Cell>& row, const SystemConfig& cfg,
                       const AnalyticMetrics& m) {
  row.push_back(Cell::integer(cfg.n_devices));
  row.push_back(Cell::db(cfg.snr_db));
  row.push_back(Cell::integer(cfg.m_partial));
  row.push_back(Cell::integer(cfg.g));
  row.push_back(Cell::db(cfg.threshold_db));
  row.push_back(Cell::prob(m.p_fa));
  row.push_back(Cell::prob(m.p_md));
  row.push_back(Cell::prob(m.p_c));
  row.push_back(Cell::prob(m.p_s));
}

inline ResultTable run_analytic(const ExperimentSpec& spec, std::ostream& err) {
  ResultTable t;
  push_point_columns(t.columns);
  const SystemConfig cfg = prepared_point_config(spec);
  const AnalyticMetrics m = success_prob(cfg);

  std::vector<Cell> row;
  push_point(row, cfg, m);
  if (spec.mode == Mode::simulate) {
    push_all_estimate_columns(t.columns);
    SimRunner sim{spec, err};
    push_all_estimates(row, sim.run(cfg, m));
  }
  t.rows.push_back(std::move(row));
  return t;
}

inline OptimizeOptions optimizer_options(const ExperimentSpec& spec) {
  OptimizeOptions opt;
  opt.max_p_c = spec.max_p_c;
  opt.max_p_md = spec.max_p_md;
  opt.sim_rerank = spec.sim_rerank;
  opt.rerank_top = spec.rerank_top;
  opt.rerank_trials = spec.trials > 0 ? spec.trials : 20000;
  opt.seed = spec.config.seed;
  opt.n_workers = spec.workers;
  return opt;
}

inline ResultTable run_optimize(const ExperimentSpec& spec) {
  if (spec.config.n_devices < 1) {
    throw ConfigError("optimize requires n_devices >= 1");
  }
  const OptimizationReport report = optimize(spec.config, spec.target_pfa, optimizer_options(spec));

  ResultTable t;
  push_point_columns(t.columns);
  t.columns.push_back("is_best");
  if (spec.sim_rerank) push_estimate_columns(t.columns, "sim_p_s");

  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    SystemConfig cfg = spec.config;
    cfg.m_partial = r.m_p;
    cfg.threshold_db = r.threshold_db;
    cfg = validate(cfg);

    std::vector<Cell> row;
    push_point(row, cfg, AnalyticMetrics{r.p_fa, r.p_md, r.p_c, r.p_s, cfg.threshold_linear});
    row.push_back(Cell::integer(i == report.best_index ? 1 : 0));
    if (spec.sim_rerank) {
      if (r.sim_p_s) {
        push_estimate(row, *r.sim_p_s);
      } else {
        row.insert(row.end(), {Cell::none(), Cell::none(), Cell::none()});
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline ResultTable run_sweep_threshold(const ExperimentSpec& spec, std::ostream& err) {
  if (spec.config.n_devices < 1) {
    throw ConfigError("sweep-threshold requires n_devices >= 1");
  }
  if (!(spec.sweep_step > 0.0)) throw UsageError("sweep step must be > 0");
  if (spec.sweep_stop < spec.sweep_start) throw UsageError("sweep range is empty");

  const std::vector<int> mp_list = spec.mp_list.empty() ? std::vector<int>{16, 64} : spec.mp_list;
  const std::vector<double> snr_list =
      spec.snr_db_list.empty() ? std::vector<double>{-10.0, -5.0} : spec.snr_db_list;
  const auto n_points =
      static_cast<std::size_t>((spec.sweep_stop - spec.sweep_start) / spec.sweep_step + 1e-9) + 1;

  ResultTable t;
  push_point_columns(t.columns);
  if (spec.trials > 0) push_all_estimate_columns(t.columns);

  SimRunner sim{spec, err};
  for (int m_p : mp_list) {
    for (double snr_db : snr_list) {
      for (std::size_t i = 0; i < n_points; ++i) {
        SystemConfig cfg = spec.config;
        cfg.m_partial = m_p;
        cfg.snr_db = snr_db;
        cfg.threshold_db = spec.sweep_start + static_cast<double>(i) * spec.sweep_step;
        cfg = validate(cfg);
        const AnalyticMetrics m = success_prob(cfg);

        std::vector<Cell> row;
        push_point(row, cfg, m);
        if (spec.trials > 0) push_all_estimates(row, sim.run(cfg, m));
        t.rows.push_back(std::move(row));
      }
    }
  }
  return t;
}

inline ResultTable run_sweep_mp(const ExperimentSpec& spec, std::ostream& err) {
  if (spec.config.n_devices < 1) {
    throw ConfigError("sweep-mp requires n_devices >= 1");
  }
  OptimizeOptions opt = optimizer_options(spec);
  opt.sim_rerank = false;  // this mode simulates every candidate below
  const OptimizationReport report = optimize(spec.config, spec.target_pfa, opt);

  ResultTable t;
  push_point_columns(t.columns);
  t.columns.push_back("is_best");
  if (spec.trials > 0) push_all_estimate_columns(t.columns);

  SimRunner sim{spec, err};
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    SystemConfig cfg = spec.config;
    cfg.m_partial = r.m_p;
    cfg.threshold_db = r.threshold_db;
    cfg = validate(cfg);
    const AnalyticMetrics m{r.p_fa, r.p_md, r.p_c, r.p_s, cfg.threshold_linear};

    std::vector<Cell> row;
    push_point(row, cfg, m);
    row.push_back(Cell::integer(i == report.best_index ? 1 : 0));
    if (spec.trials > 0) push_all_estimates(row, sim.run(cfg, m));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline ResultTable run_table2(const ExperimentSpec& spec, std::ostream& err) {
  static constexpr int kDevices[] = {1, 2, 5, 10};
  static constexpr double kSnrDb[] = {-5.0, -10.0};

  ResultTable t;
  t.columns = {"n_m",
               "snr_db",
               "baseline_m_p",
               "baseline_threshold_db",
               "baseline_p_fa",
               "baseline_p_md",
               "baseline_p_c",
               "baseline_p_s",
               "m_p",
               "g",
               "threshold_db",
               "p_fa",
               "p_md",
               "p_c",
               "p_s"};
  if (spec.trials > 0) push_all_estimate_columns(t.columns);

  SimRunner sim{spec, err};
  for (double snr_db : kSnrDb) {
    for (int n_m : kDevices) {
      SystemConfig tmpl = spec.config;
      tmpl.n_devices = n_m;
      tmpl.snr_db = snr_db;

      SystemConfig baseline = tmpl;
      baseline.m_partial = baseline.m_base;
      baseline.threshold_db = calibrate_threshold(spec.target_pfa, baseline.m_base);
      baseline = validate(baseline);
      const AnalyticMetrics base = success_prob(baseline);

      const OptimizationReport report = optimize(tmpl, spec.target_pfa, OptimizeOptions{});
      const auto& best = report.rows[report.best_index];
      SystemConfig proposed = tmpl;
      proposed.m_partial = best.m_p;
      proposed.threshold_db = best.threshold_db;
      proposed = validate(proposed);
      const AnalyticMetrics prop{best.p_fa, best.p_md, best.p_c, best.p_s,
                                 proposed.threshold_linear};

      std::vector<Cell> row;
      row.push_back(Cell::integer(n_m));
      row.push_back(Cell::db(snr_db));
      row.push_back(Cell::integer(baseline.m_partial));
      row.push_back(Cell::db(baseline.threshold_db));
      row.push_back(Cell::prob(base.p_fa));
      row.push_back(Cell::prob(base.p_md));
      row.push_back(Cell::prob(base.p_c));
      row.push_back(Cell::prob(base.p_s));
      row.push_back(Cell::integer(best.m_p));
      row.push_back(Cell::integer(best.g));
      row.push_back(Cell::db(best.threshold_db));
      row.push_back(Cell::prob(best.p_fa));
      row.push_back(Cell::prob(best.p_md));
      row.push_back(Cell::prob(best.p_c));
      row.push_back(Cell::prob(best.p_s));
      if (spec.trials > 0) push_all_estimates(row, sim.run(proposed, prop));
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

}  // namespace detail

/// Builds the full result table for a spec without writing it anywhere.
inline ResultTable build_results(const ExperimentSpec& spec, std::ostream& err = std::cerr) {
  switch (spec.mode) {
    case Mode::analytic:
    case Mode::simulate:
      return detail::run_analytic(spec, err);
    case Mode::optimize:
      return detail::run_optimize(spec);
    case Mode::sweep_threshold:
      return detail::run_sweep_threshold(spec, err);
    case Mode::sweep_mp:
      return detail::run_sweep_mp(spec, err);
    case Mode::table2:
      return detail::run_table2(spec, err);
  }
  throw UsageError("unknown mode");
}

inline void write_results(const ExperimentSpec& spec, const ResultTable& t, std::ostream& out) {
  if (spec.format == OutputFormat::csv) {
    write_csv(t, out);
  } else {
    out << to_json(spec, t).dump(2) << '\n';
  }
}

/// Runs the experiment and writes the dataset to spec.out_path (stdout
/// when empty). Throws on any failure; callers map exceptions to exit
/// codes.
inline void run_experiment(const ExperimentSpec& spec, std::ostream& err = std::cerr) {
  if (spec.trials < 1 && (spec.mode == Mode::simulate || spec.sim_rerank)) {
    throw UsageError("this mode needs --trials >= 1");
  }
  const ResultTable t = build_results(spec, err);
  if (spec.out_path.empty()) {
    write_results(spec, t, std::cout);
    return;
  }
  std::ofstream out(spec.out_path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open output path: " + spec.out_path);
  }
  write_results(spec, t, out);
  if (!out.good()) {
    throw std::runtime_error("failed writing output path: " + spec.out_path);
  }
}

}  // namespace ppt
