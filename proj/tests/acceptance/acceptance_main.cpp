// Acceptance gate for the toolkit. Each criterion prints one PASS/FAIL
// line; the process exits nonzero if any criterion fails. argv[1] is the
// path to the CLI binary, used by the end-to-end determinism check.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ppt/ppt.hpp"
#include "../support/oracles.hpp"

namespace {

int failures = 0;

void report(int number, const std::string& label, bool ok, const std::string& detail) {
  if (ok) {
    std::printf("PASS criterion %d: %s\n", number, label.c_str());
  } else {
    std::printf("FAIL criterion %d: %s -- %s\n", number, label.c_str(), detail.c_str());
    ++failures;
  }
  std::fflush(stdout);
}

ppt::SystemConfig make_config(int n_devices, double snr_db, int m_partial) {
  ppt::SystemConfig cfg;
  cfg.xi = 5;
  cfg.nu = 4;
  cfg.n_preambles = 12;
  cfg.m_base = 64;
  cfg.m_partial = m_partial;
  cfg.snr_db = snr_db;
  cfg.n_devices = n_devices;
  return cfg;
}

// 1. Calibrated thresholds land on the reference operating points.
void criterion_1() {
  std::ostringstream detail;
  bool ok = true;
  const struct {
    int m_p;
    double expected_db;
  } cases[] = {{64, 1.86}, {16, 3.44}};
  for (const auto& c : cases) {
    const double db = ppt::calibrate_threshold(1e-4, c.m_p);
    if (!(std::abs(db - c.expected_db) <= 0.05)) {
      ok = false;
      detail << "m_p=" << c.m_p << " gave " << db << " dB, expected " << c.expected_db
             << " +/- 0.05; ";
    }
  }
  report(1, "threshold calibration at target 1e-4 (m_p 64 and 16)", ok, detail.str());
}

// 2. Baseline (single partial unit) collision probabilities match the
// reference values to their displayed precision.
void criterion_2() {
  std::ostringstream detail;
  bool ok = true;
  const struct {
    int n_m;
    double pct;
    double tol;
  } cases[] = {{1, 0.0, 1e-9}, {2, 8.3, 0.05}, {5, 29.4, 0.05}, {10, 54.3, 0.05}};
  for (const auto& c : cases) {
    const auto cfg = ppt::validate(make_config(c.n_m, -5.0, 64));
    const double pct = 100.0 * ppt::collision_prob(cfg);
    if (!(std::abs(pct - c.pct) <= c.tol)) {
      ok = false;
      detail << "n_m=" << c.n_m << " gave " << pct << "%, expected " << c.pct << "; ";
    }
  }
  report(2, "baseline collision probabilities for n_m in {1,2,5,10}", ok, detail.str());
}

// 3. The optimizer reproduces the reference operating table: winning
// repetition count exactly, p_c to displayed precision, p_s within one
// percentage point, p_md within 15% relative (zero cells below 1e-7).
void criterion_3() {
  std::ostringstream detail;
  bool ok = true;
  const struct {
    int n_m;
    double snr_db;
    int best_m_p;
    double pc_pct;
    double pc_tol;
    double pmd;
    double ps_pct;
  } rows[] = {
      {1, -5.0, 64, 0.0, 1e-9, 0.0, 100.0},
      {1, -10.0, 64, 0.0, 1e-9, 8.41e-7, 100.0},
      {2, -5.0, 16, 2.08, 0.005, 4.46e-5, 97.9},
      {2, -10.0, 32, 4.2, 0.05, 4.34e-3, 95.4},
      {5, -5.0, 8, 4.10, 0.005, 1.48e-2, 94.5},
      {5, -10.0, 32, 15.7, 0.05, 4.06e-3, 84.0},
      {10, -5.0, 8, 8.99, 0.005, 1.44e-2, 89.7},
      {10, -10.0, 16, 17.3, 0.05, 1.26e-1, 72.3},
  };
  for (const auto& r : rows) {
    const auto tmpl = make_config(r.n_m, r.snr_db, 64);
    const auto rep = ppt::optimize(tmpl, 1e-4);
    const auto& best = rep.rows[rep.best_index];
    const auto where = [&] {
      std::ostringstream w;
      w << "(n_m=" << r.n_m << ", snr=" << r.snr_db << ")";
      return w.str();
    }();
    if (rep.best_m_p != r.best_m_p) {
      ok = false;
      detail << where << " best m_p " << rep.best_m_p << " != " << r.best_m_p << "; ";
      continue;
    }
    if (!(std::abs(100.0 * best.p_c - r.pc_pct) <= r.pc_tol)) {
      ok = false;
      detail << where << " p_c " << 100.0 * best.p_c << "% vs " << r.pc_pct << "%; ";
    }
    if (r.pmd == 0.0) {
      if (!(best.p_md < 1e-7)) {
        ok = false;
        detail << where << " p_md " << best.p_md << " not < 1e-7; ";
      }
    } else if (!(std::abs(best.p_md - r.pmd) <= 0.15 * r.pmd)) {
      ok = false;
      detail << where << " p_md " << best.p_md << " vs " << r.pmd << " +/- 15%; ";
    }
    if (!(std::abs(100.0 * best.p_s - r.ps_pct) <= 1.0)) {
      ok = false;
      detail << where << " p_s " << 100.0 * best.p_s << "% vs " << r.ps_pct << "%; ";
    }
  }
  report(3, "optimizer reproduces the reference operating table (8 rows)", ok, detail.str());
}

// 4. The simulated detection statistic follows the gamma law: one-sample
// KS over 1e5 draws stays below the 1% critical value for every
// (occupancy, repetition count) combination.
void criterion_4() {
  std::ostringstream detail;
  bool ok = true;
  constexpr std::size_t n = 100000;
  constexpr double crit = 0.005146997785868953;  // 1.6276 / sqrt(n)
  std::uint64_t combo = 0;
  for (int m_p : {1, 8, 64}) {
    const auto cfg = ppt::validate(make_config(5, -5.0, m_p));
    const double nxi = static_cast<double>(cfg.symbols_per_basic_unit());
    for (int k : {0, 1, 2}) {
      auto eng = ppt::trial_rng(314159, combo++);
      std::vector<double> samples;
      samples.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        samples.push_back(ppt::simulate_statistic_block(k, cfg, eng));
      }
      ppt::GammaLaw law = ppt::j_law(k, cfg);
      law.rate *= nxi;  // the statistic is normalized by the noise-only mean
      const double d = oracles::ks_statistic(
          std::move(samples), [&](double x) { return ppt::gamma_cdf(law, x); });
      if (!(d < crit)) {
        ok = false;
        detail << "(k=" << k << ", m_p=" << m_p << ") D=" << d << " >= " << crit << "; ";
      }
    }
  }
  report(4, "simulated statistic matches the gamma law (9 KS tests at 1%)", ok, detail.str());
}

// 5. Monte Carlo agrees with the closed forms across the repetition-count
// sweep at a false-alarm target rare events remain observable for: each of
// the 28 metric cells gets a 95% binomial interval around the closed form,
// and at least 26 must contain the empirical value.
void criterion_5() {
  std::ostringstream detail;
  int cells = 0;
  int hits = 0;
  const auto check = [&](double emp, double cf, std::uint64_t n_trials, const char* name,
                         int m_p) {
    ++cells;
    const double bound = 1.96 * std::sqrt(cf * (1.0 - cf) / static_cast<double>(n_trials));
    if (std::abs(emp - cf) <= bound) {
      ++hits;
    } else {
      detail << name << "@m_p=" << m_p << " emp=" << emp << " cf=" << cf << " n=" << n_trials
             << "; ";
    }
  };
  for (int m_p : ppt::candidate_repetitions(64)) {
    auto cfg = make_config(5, -5.0, m_p);
    cfg.threshold_db = ppt::calibrate_threshold(1e-2, m_p);
    cfg = ppt::validate(cfg);
    const auto cf = ppt::success_prob(cfg, cfg.threshold_db);
    ppt::EstimateOptions opt;
    opt.n_trials = 20000;
    opt.seed = ppt::derive_seed(777, static_cast<std::uint64_t>(m_p));
    opt.n_workers = 4;
    const auto est = ppt::estimate_metrics(cfg, opt);
    check(est.p_fa.value, cf.p_fa, est.p_fa.trials, "p_fa", m_p);
    check(est.p_md.value, cf.p_md, est.p_md.trials, "p_md", m_p);
    check(est.p_c.value, cf.p_c, est.p_c.trials, "p_c", m_p);
    check(est.p_s.value, cf.p_s, est.p_s.trials, "p_s", m_p);
  }
  std::ostringstream head;
  head << "simulation within 95% intervals of closed forms (" << hits << "/" << cells
       << " cells, need >= 26)";
  report(5, head.str(), hits >= 26 && cells == 28, detail.str());
}

// 6. Shape of the trade-off across repetition counts: misdetection only
// improves, collisions only worsen, and their product peaks strictly
// inside the candidate range.
void criterion_6() {
  std::ostringstream detail;
  bool ok = true;
  const auto candidates = ppt::candidate_repetitions(64);
  std::vector<ppt::AnalyticMetrics> metrics;
  for (int m_p : candidates) {
    auto cfg = make_config(5, -5.0, m_p);
    cfg.threshold_db = ppt::calibrate_threshold(1e-4, m_p);
    cfg = ppt::validate(cfg);
    metrics.push_back(ppt::success_prob(cfg, cfg.threshold_db));
  }
  std::size_t best = 0;
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    if (i > 0) {
      if (metrics[i].p_md > metrics[i - 1].p_md * (1.0 + 1e-12)) {
        ok = false;
        detail << "p_md rises at m_p=" << candidates[i] << "; ";
      }
      if (metrics[i].p_c + 1e-15 < metrics[i - 1].p_c) {
        ok = false;
        detail << "p_c falls at m_p=" << candidates[i] << "; ";
      }
    }
    if (metrics[i].p_s > metrics[best].p_s) best = i;
  }
  if (candidates[best] != 8) {
    ok = false;
    detail << "p_s peaks at m_p=" << candidates[best] << ", expected 8; ";
  }
  if (best == 0 || best + 1 == candidates.size()) {
    ok = false;
    detail << "peak is not interior; ";
  }
  report(6, "monotone p_md/p_c with an interior p_s maximum at m_p=8", ok, detail.str());
}

// 7. Special functions against independent oracles: quadrature agreement
// for the regularized lower gamma, and tight inversion round-trips.
void criterion_7() {
  std::ostringstream detail;
  bool ok = true;
  std::mt19937_64 eng(20240817);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double a = 1.0 + 199.0 * uni(eng);
    const double x = uni(eng) * (a + 10.0 * std::sqrt(a));
    const double lib = ppt::reg_lower_gamma(a, x);
    const double ref = oracles::reg_lower_gamma_quad(a, x);
    if (!(std::abs(lib - ref) <= 1e-8)) {
      ok = false;
      detail << "P(" << a << ", " << x << ") off by " << std::abs(lib - ref) << "; ";
    }
  }
  for (double a : {1.0, 2.0, 8.0, 16.0, 64.0, 170.3}) {
    for (double p : {1e-12, 1e-9, 1e-6, 1e-3, 0.1, 0.5, 0.9, 0.999}) {
      const double x = ppt::inv_reg_upper_gamma(a, p);
      const double back = ppt::reg_upper_gamma(a, x);
      if (!(std::abs(back - p) <= 1e-9 * p)) {
        ok = false;
        detail << "inverse(a=" << a << ", p=" << p << ") round-trip error "
               << std::abs(back - p) / p << "; ";
      }
    }
  }
  report(7, "gamma functions vs quadrature oracle; inversion round-trips", ok, detail.str());
}

// 8. End-to-end determinism: the CLI produces byte-identical files for
// repeated runs with the same seed.
void criterion_8(const std::string& cli) {
  std::ostringstream detail;
  bool ok = true;
  if (cli.empty()) {
    report(8, "CLI output is byte-identical across repeated runs", false,
           "CLI binary path not supplied as argv[1]");
    return;
  }
  const auto ticks = std::chrono::steady_clock::now().time_since_epoch().count();
  const auto dir = std::filesystem::temp_directory_path();
  const auto file_a = dir / ("pptsim_acc_a_" + std::to_string(ticks) + ".csv");
  const auto file_b = dir / ("pptsim_acc_b_" + std::to_string(ticks) + ".csv");

  const auto run = [&](const std::filesystem::path& out) {
    const std::string cmd = "\"" + cli + "\" table2 --seed 42 --trials 10000 --workers 4 --out \"" +
                            out.string() + "\" >/dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  const auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };

  if (run(file_a) != 0 || run(file_b) != 0) {
    ok = false;
    detail << "CLI invocation failed; ";
  } else {
    const std::string a = slurp(file_a);
    const std::string b = slurp(file_b);
    if (a.empty()) {
      ok = false;
      detail << "output file is empty; ";
    } else if (a != b) {
      ok = false;
      detail << "outputs differ (" << a.size() << " vs " << b.size() << " bytes); ";
    }
  }
  std::filesystem::remove(file_a);
  std::filesystem::remove(file_b);
  report(8, "CLI output is byte-identical across repeated runs", ok, detail.str());
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8(cli);
  if (failures != 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
