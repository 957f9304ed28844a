// config.hpp - protocol/channel configuration, validation, the contention
// space geometry (preambles x partial units), and the sub-carrier hopping
// pattern hook.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppt {

/// Thrown on invalid configuration (bad field value, bad config file).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

/// Complete parameter set for one NPRACH configuration.
///
/// Raw fields are user-settable (config file keys use the same names).
/// Derived fields are populated by validate(); all internal math runs on
/// the linear quantities. Powers are normalized so the per-symbol noise
/// variance is 1 and snr_db is the per-symbol received SNR; threshold_db
/// is relative to the noise-only mean of the accumulated statistic.
struct SystemConfig {
  int xi = 5;           ///< symbols per symbol group
  int nu = 4;           ///< symbol groups per basic unit
  int n_preambles = 12; ///< orthogonal preambles per NPRACH
  int m_base = 64;      ///< baseline repetition count
  int m_partial = 64;   ///< partial-sequence repetition count (power of two)
  double snr_db = -5.0; ///< per-symbol received SNR [dB]
  int n_devices = 5;    ///< contending devices per session
  double threshold_db = std::numeric_limits<double>::quiet_NaN(); ///< detection threshold [dB]; NaN = calibrate later
  std::uint64_t seed = 1; ///< master RNG seed

  // Derived by validate(); g == 0 means "not validated yet".
  int g = 0;               ///< partial units per preamble, m_base / m_partial
  double snr_linear = 0.0;
  double threshold_linear = std::numeric_limits<double>::quiet_NaN();

  /// Symbols coherently accumulated per basic unit (nu * xi).
  int symbols_per_basic_unit() const { return nu * xi; }
  /// Symbol groups in one partial sequence (nu * m_partial).
  int partial_length() const { return nu * m_partial; }
  /// Symbol groups in one baseline preamble (nu * m_base).
  int baseline_length() const { return nu * m_base; }
  /// Size of the contention space, n_preambles * g.
  int n_resources() const { return n_preambles * g; }
};

/// Checks structural invariants and returns the config with derived
/// quantities (g, linear SNR, linear threshold) populated.
inline SystemConfig validate(SystemConfig cfg) {
  if (cfg.xi < 1) throw ConfigError("xi must be >= 1");
  if (cfg.nu < 1) throw ConfigError("nu must be >= 1");
  if (cfg.n_preambles < 1) throw ConfigError("n_preambles must be >= 1");
  if (cfg.n_devices < 0) throw ConfigError("n_devices must be >= 0");
  if (cfg.m_base < 1) throw ConfigError("m_base must be >= 1");
  if (!is_power_of_two(cfg.m_partial)) {
    throw ConfigError("m_partial must be a power of two (got " +
                      std::to_string(cfg.m_partial) + ")");
  }
  if (cfg.m_base % cfg.m_partial != 0) {
    throw ConfigError("m_partial (" + std::to_string(cfg.m_partial) +
                      ") must divide m_base (" + std::to_string(cfg.m_base) + ")");
  }
  cfg.g = cfg.m_base / cfg.m_partial;
  cfg.snr_linear = std::pow(10.0, cfg.snr_db / 10.0);
  cfg.threshold_linear = std::pow(10.0, cfg.threshold_db / 10.0);  // NaN stays NaN
  return cfg;
}

/// One slot of the contention space: a (preamble, partial unit) pair.
struct ContentionResource {
  int preamble_index = 0;
  int partial_unit_index = 0;

  friend bool operator==(const ContentionResource&, const ContentionResource&) = default;
};

/// Maps a resource to its flat index in [0, n_preambles*g).
inline int resource_flat_index(const ContentionResource& r, const SystemConfig& cfg) {
  return r.preamble_index * cfg.g + r.partial_unit_index;
}

inline ContentionResource resource_from_flat_index(int flat, const SystemConfig& cfg) {
  return ContentionResource{flat / cfg.g, flat % cfg.g};
}

/// Sub-carrier index sequence for one preamble over `length` symbol groups.
///
/// Placeholder pattern: symbol-group position l uses sub-carrier
/// (preamble_index + l) mod n_subcarriers, which keeps the map from
/// preamble index to sub-carrier injective at every position, so detection
/// statistics of distinct preambles never mix. Swap this function to plug
/// in a standardized hopping sequence.
inline std::vector<int> hopping_pattern(int preamble_index, int length, int n_subcarriers) {
  if (n_subcarriers < 1) {
    throw ConfigError("hopping_pattern requires n_subcarriers >= 1");
  }
  if (preamble_index < 0 || preamble_index >= n_subcarriers) {
    throw ConfigError("preamble_index " + std::to_string(preamble_index) +
                      " out of range [0, " + std::to_string(n_subcarriers) + ")");
  }
  if (length < 0) {
    throw ConfigError("hopping_pattern requires length >= 0");
  }
  std::vector<int> pattern(static_cast<std::size_t>(length));
  for (int l = 0; l < length; ++l) {
    pattern[static_cast<std::size_t>(l)] = (preamble_index + l) % n_subcarriers;
  }
  return pattern;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T value{};
  in >> value;
  if (in.fail() || !(in >> std::ws).eof()) {
    throw ConfigError("config key '" + key + "': cannot parse value '" + text + "'");
  }
  return value;
}

}  // namespace detail

/// Applies one `key = value` setting to a config. Keys match the
/// SystemConfig field names.
inline void apply_config_entry(SystemConfig& cfg, const std::string& key,
                               const std::string& value) {
  if (key == "xi") cfg.xi = detail::parse_number<int>(key, value);
  else if (key == "nu") cfg.nu = detail::parse_number<int>(key, value);
  else if (key == "n_preambles") cfg.n_preambles = detail::parse_number<int>(key, value);
  else if (key == "m_base") cfg.m_base = detail::parse_number<int>(key, value);
  else if (key == "m_partial") cfg.m_partial = detail::parse_number<int>(key, value);
  else if (key == "snr_db") cfg.snr_db = detail::parse_number<double>(key, value);
  else if (key == "n_devices") cfg.n_devices = detail::parse_number<int>(key, value);
  else if (key == "threshold_db") cfg.threshold_db = detail::parse_number<double>(key, value);
  else if (key == "seed") cfg.seed = detail::parse_number<std::uint64_t>(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

/// Parses flat `key = value` text (one entry per line, `#` comments) on top
/// of `base`. Does not validate.
inline SystemConfig parse_config_text(std::istream& in, SystemConfig base = {}) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value', got '" + line + "'");
    }
    try {
      apply_config_entry(base, detail::trim(line.substr(0, eq)),
                         detail::trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

inline SystemConfig load_config_file(const std::string& path, SystemConfig base = {}) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  return parse_config_text(in, base);
}

}  // namespace ppt
