// cli.hpp - Command-line parsing into an ExperimentSpec. Flags override
// config-file values; the mode is a subcommand. Kept separate from
// experiment.hpp so library users are not forced to pull in CLI11.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ppt/experiment.hpp"
#include "ppt/version.hpp"

namespace ppt {

/// --help was given; what() is the help text (exit 0, not an error).
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline Mode mode_from_name(const std::string& name) {
  if (name == "analytic") return Mode::analytic;
  if (name == "simulate") return Mode::simulate;
  if (name == "optimize") return Mode::optimize;
  if (name == "sweep-threshold") return Mode::sweep_threshold;
  if (name == "sweep-mp") return Mode::sweep_mp;
  if (name == "table2") return Mode::table2;
  throw UsageError("unknown mode: " + name);
}

}  // namespace detail

/// Parses command-line arguments (program name excluded). Throws
/// UsageError on misuse, HelpRequested for --help, ConfigError when the
/// assembled system configuration is invalid.
inline ExperimentSpec parse_args(const std::vector<std::string>& args) {
  // Config files load first so that flags override their values.
  SystemConfig base;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config requires a file path");
      base = load_config_file(args[i + 1], base);
    } else if (args[i].rfind("--config=", 0) == 0) {
      base = load_config_file(args[i].substr(9), base);
    }
  }

  CLI::App app{std::string(kToolName) +
               " - access reservation with partial preamble sequences:"
               " closed-form analysis, Monte Carlo simulation, and"
               " repetition-count optimization"};
  app.name(kToolName);

  ExperimentSpec spec;
  SystemConfig cfg = base;
  double threshold_db = cfg.threshold_db;
  std::string format = "csv";
  std::string config_path;
  double max_pc = 0.0;
  double max_pmd = 0.0;

  app.add_option("--config", config_path, "config file with 'key = value' lines");
  app.add_option("--xi", cfg.xi, "symbols per symbol group");
  app.add_option("--nu", cfg.nu, "symbol groups per basic unit");
  app.add_option("--np", cfg.n_preambles, "number of orthogonal preambles");
  app.add_option("--mb", cfg.m_base, "baseline repetition count M_b");
  app.add_option("--mp", cfg.m_partial, "partial repetition count M_p (power of two)");
  app.add_option("--nm", cfg.n_devices, "number of contending devices");
  app.add_option("--snr-db", cfg.snr_db, "per-symbol received SNR [dB]");
  app.add_option("--threshold-db", threshold_db,
                 "detection threshold over the noise floor [dB]; omit to calibrate");
  app.add_option("--seed", cfg.seed, "master RNG seed");
  auto* trials_opt = app.add_option("--trials", spec.trials, "Monte Carlo sessions per point");
  app.add_option("--workers", spec.workers, "worker threads (result-invariant)");
  app.add_option("--max-empty", spec.max_empty_per_session,
                 "noise-only resources evaluated per session (0 = all)");
  app.add_option("--target-pfa", spec.target_pfa, "false-alarm rate for threshold calibration");
  app.add_option("--out", spec.out_path, "output file (default: stdout)");
  app.add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--start", spec.sweep_start, "threshold sweep start [dB]");
  app.add_option("--stop", spec.sweep_stop, "threshold sweep stop [dB]");
  app.add_option("--step", spec.sweep_step, "threshold sweep step [dB]");
  app.add_option("--mp-list", spec.mp_list, "comma-separated M_p series for sweep-threshold")
      ->delimiter(',');
  app.add_option("--snr-db-list", spec.snr_db_list,
                 "comma-separated SNR series for sweep-threshold [dB]")
      ->delimiter(',');
  auto* max_pc_opt = app.add_option("--max-pc", max_pc, "feasibility cap on collision probability");
  auto* max_pmd_opt =
      app.add_option("--max-pmd", max_pmd, "feasibility cap on misdetection probability");
  app.add_flag("--sim-rerank", spec.sim_rerank, "re-rank leading candidates by simulation");
  app.add_option("--rerank-top", spec.rerank_top, "candidates to re-rank with --sim-rerank");

  app.add_subcommand("analytic", "closed-form metrics at one operating point");
  app.add_subcommand("simulate", "Monte Carlo estimates next to the closed forms");
  app.add_subcommand("optimize", "pick the success-maximizing repetition count");
  app.add_subcommand("sweep-threshold", "metrics across a detection-threshold range");
  app.add_subcommand("sweep-mp", "metrics across all candidate repetition counts");
  app.add_subcommand("table2", "baseline vs optimized summary over a load/SNR grid");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();
  app.require_subcommand(0, 1);

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back(kToolName);
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string(e.what()) + "\nRun with --help for usage.");
  }

  const auto subs = app.get_subcommands();
  if (subs.empty()) throw UsageError(app.help());
  spec.mode = detail::mode_from_name(subs.front()->get_name());

  cfg.threshold_db = threshold_db;
  spec.config = validate(cfg);
  if (max_pc_opt->count() > 0) spec.max_p_c = max_pc;
  if (max_pmd_opt->count() > 0) spec.max_p_md = max_pmd;
  spec.format = format == "json" ? OutputFormat::json : OutputFormat::csv;

  if (spec.mode == Mode::simulate && trials_opt->count() == 0) {
    spec.trials = 100000;
  }
  if (spec.mode == Mode::simulate && spec.trials < 1) {
    throw UsageError("simulate requires --trials >= 1");
  }
  if (!(spec.target_pfa > 0.0 && spec.target_pfa < 1.0)) {
    throw UsageError("--target-pfa must be in (0, 1)");
  }
  if (spec.workers < 1) throw UsageError("--workers must be >= 1");
  if (spec.rerank_top < 1) throw UsageError("--rerank-top must be >= 1");
  if (spec.mode == Mode::sweep_threshold) {
    if (!(spec.sweep_step > 0.0)) throw UsageError("--step must be > 0");
    if (spec.sweep_stop < spec.sweep_start) throw UsageError("sweep range is empty");
  }
  return spec;
}

inline ExperimentSpec parse_args(int argc, const char* const* argv) {
  return parse_args(std::vector<std::string>(argv + 1, argv + argc));
}

}  // namespace ppt
