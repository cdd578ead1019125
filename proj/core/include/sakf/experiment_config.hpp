#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "sakf/channel.hpp"
#include "sakf/estimation.hpp"
#include "sakf/modem.hpp"

namespace sakf::harness {

enum class Method { LS, MMSE, SAKF };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);
// Comma-separated list, e.g. "ls,mmse,sakf". Duplicates are dropped.
std::vector<Method> parse_methods(std::string_view list);

struct ExperimentConfig {
  channel::SimWaveformConfig waveform;
  channel::PathSamplingBounds paths;
  int bs_rows = 8;
  int bs_cols = 8;
  int ue_rows = 1;
  int ue_cols = 1;
  modem::QamOrder modulation = modem::QamOrder::Qam4;
  std::vector<double> snr_points_db = {-4, -3, -2, -1, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  int trials_per_point = 200;
  std::vector<Method> methods = {Method::LS, Method::MMSE, Method::SAKF};
  std::uint64_t master_seed = 1;
  bool aoa_reuse = false;
  estimation::MusicGrid music;
  double max_freq_offset_hz = 0.0;   // per-packet constant offsets drawn in [-max, max]
  double max_timing_offset_s = 0.0;
  int rhh_ensemble_size = 1000;
  int data_symbols = 64;             // ULD symbols per packet
  int workers = 1;
  bool record_timing = false;

  // Reference scenario: 28 GHz, 8x8 BS UPA, single-antenna user, two paths.
  static ExperimentConfig defaults();

  array::ArrayConfig bs_array() const;
  array::ArrayConfig ue_array() const;
  void validate() const;

  // Applies one `key = value` setting; throws ConfigError on unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
};

// Flat key-value text: one `key = value` per line, `#` starts a comment.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = ExperimentConfig::defaults());
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = ExperimentConfig::defaults());

// Inclusive range min, min+step, ... <= max (+1e-9).
std::vector<double> snr_range(double min_db, double max_db, double step_db);

}  // namespace sakf::harness
