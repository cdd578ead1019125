#include "sakf/experiment_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>

#include "sakf/errors.hpp"

namespace sakf::harness {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::LS: return "ls";
    case Method::MMSE: return "mmse";
    case Method::SAKF: return "sakf";
  }
  return "unknown";
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

double to_double(std::string_view key, std::string_view value) {
  value = trim(value);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out))
    throw ConfigError("invalid number for '" + std::string(key) + "': '" + std::string(value) + "'");
  return out;
}

long long to_integer(std::string_view key, std::string_view value) {
  value = trim(value);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("invalid integer for '" + std::string(key) + "': '" + std::string(value) + "'");
  return out;
}

int to_int(std::string_view key, std::string_view value) {
  const long long v = to_integer(key, value);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError("integer out of range for '" + std::string(key) + "'");
  return static_cast<int>(v);
}

bool to_bool(std::string_view key, std::string_view value) {
  const auto v = lower(trim(value));
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("invalid boolean for '" + std::string(key) + "': '" + std::string(value) + "'");
}

std::vector<double> to_list(std::string_view key, std::string_view value) {
  std::vector<double> out;
  while (!value.empty()) {
    const auto comma = value.find(',');
    const auto item = trim(value.substr(0, comma));
    if (!item.empty()) out.push_back(to_double(key, item));
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

Method parse_method(std::string_view name) {
  const auto n = lower(trim(name));
  if (n == "ls") return Method::LS;
  if (n == "mmse") return Method::MMSE;
  if (n == "sakf") return Method::SAKF;
  throw ConfigError("unknown method '" + std::string(name) + "' (expected ls, mmse or sakf)");
}

std::vector<Method> parse_methods(std::string_view list) {
  std::vector<Method> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    const auto item = trim(list.substr(0, comma));
    if (!item.empty()) {
      const Method m = parse_method(item);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("method list is empty");
  return out;
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig cfg;
  cfg.paths = channel::PathSamplingBounds::defaults_for(cfg.waveform);
  cfg.data_symbols = cfg.waveform.num_symbols;
  return cfg;
}

array::ArrayConfig ExperimentConfig::bs_array() const {
  return array::ArrayConfig::half_wavelength(bs_rows, bs_cols, waveform.carrier_hz);
}

array::ArrayConfig ExperimentConfig::ue_array() const {
  return array::ArrayConfig::half_wavelength(ue_rows, ue_cols, waveform.carrier_hz);
}

void ExperimentConfig::validate() const {
  waveform.validate();
  paths.validate();
  music.validate();
  (void)bs_array();
  (void)ue_array();
  if (bs_rows * bs_cols < 2) throw ConfigError("base-station array needs at least two elements");
  if (waveform.num_paths >= bs_rows * bs_cols) throw ConfigError("path count must be below the BS element count");
  if (!(waveform.noise_var_w > 0.0)) throw ConfigError("noise variance must be positive");
  if (snr_points_db.empty()) throw ConfigError("SNR list is empty");
  if (trials_per_point < 1) throw ConfigError("trials per point must be at least 1");
  if (methods.empty()) throw ConfigError("method list is empty");
  if (rhh_ensemble_size < 1) throw ConfigError("R_hh ensemble size must be at least 1");
  if (data_symbols < 1) throw ConfigError("data symbols per packet must be at least 1");
  if (workers < 1) throw ConfigError("worker count must be at least 1");
  if (max_freq_offset_hz < 0.0 || max_timing_offset_s < 0.0) throw ConfigError("offset bounds must be non-negative");
}

void ExperimentConfig::set(std::string_view raw_key, std::string_view value) {
  const std::string key = lower(trim(raw_key));
  using Setter = std::function<void(std::string_view)>;
  auto deg = [&](double& field) { return [&field, key](std::string_view v) { field = deg_to_rad(to_double(key, v)); }; };
  auto num = [&](double& field) { return [&field, key](std::string_view v) { field = to_double(key, v); }; };
  auto integer = [&](int& field) { return [&field, key](std::string_view v) { field = to_int(key, v); }; };

  const std::map<std::string, Setter, std::less<>> setters = {
      {"carrier_hz", num(waveform.carrier_hz)},
      {"subcarrier_spacing_hz", num(waveform.subcarrier_spacing_hz)},
      {"num_subcarriers", integer(waveform.num_subcarriers)},
      {"num_symbols", integer(waveform.num_symbols)},
      {"guard_s", num(waveform.guard_s)},
      {"noise_var_w", num(waveform.noise_var_w)},
      {"num_paths", integer(waveform.num_paths)},
      {"bs_rows", integer(bs_rows)},
      {"bs_cols", integer(bs_cols)},
      {"ue_rows", integer(ue_rows)},
      {"ue_cols", integer(ue_cols)},
      {"modulation", [&](std::string_view v) { modulation = modem::qam_order_from_int(to_int(key, v)); }},
      {"snr_db", [&](std::string_view v) { snr_points_db = to_list(key, v); }},
      {"trials", integer(trials_per_point)},
      {"methods", [&](std::string_view v) { methods = parse_methods(v); }},
      {"seed",
       [&](std::string_view v) {
         const long long s = to_integer(key, v);
         if (s < 0) throw ConfigError("seed must be non-negative");
         master_seed = static_cast<std::uint64_t>(s);
       }},
      {"aoa_reuse", [&](std::string_view v) { aoa_reuse = to_bool(key, v); }},
      {"music_step_deg", deg(music.step)},
      {"music_exclusion_steps", integer(music.exclusion_steps)},
      {"nlos_gain_db", [&](std::string_view v) { paths.nlos_gain_variance = std::pow(10.0, to_double(key, v) / 10.0); }},
      {"max_delay_s", num(paths.max_delay_s)},
      {"max_doppler_hz", num(paths.max_doppler_hz)},
      {"aoa_azimuth_min_deg", deg(paths.aoa_azimuth_min)},
      {"aoa_azimuth_max_deg", deg(paths.aoa_azimuth_max)},
      {"aoa_elevation_min_deg", deg(paths.aoa_elevation_min)},
      {"aoa_elevation_max_deg", deg(paths.aoa_elevation_max)},
      {"aod_azimuth_min_deg", deg(paths.aod_azimuth_min)},
      {"aod_azimuth_max_deg", deg(paths.aod_azimuth_max)},
      {"aod_elevation_min_deg", deg(paths.aod_elevation_min)},
      {"aod_elevation_max_deg", deg(paths.aod_elevation_max)},
      {"min_aoa_separation_deg", deg(paths.min_aoa_azimuth_separation)},
      {"max_freq_offset_hz", num(max_freq_offset_hz)},
      {"max_timing_offset_s", num(max_timing_offset_s)},
      {"rhh_ensemble", integer(rhh_ensemble_size)},
      {"data_symbols", integer(data_symbols)},
      {"workers", integer(workers)},
      {"record_timing", [&](std::string_view v) { record_timing = to_bool(key, v); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown configuration key '" + key + "'");
  it->second(value);
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    try {
      base.set(view.substr(0, eq), view.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, std::move(base));
}

std::vector<double> snr_range(double min_db, double max_db, double step_db) {
  if (!(step_db > 0.0)) throw ConfigError("SNR step must be positive");
  if (!(max_db >= min_db)) throw ConfigError("SNR max must not be below SNR min");
  std::vector<double> out;
  const int count = static_cast<int>(std::floor((max_db - min_db) / step_db + 1e-9)) + 1;
  for (int i = 0; i < count; ++i) out.push_back(min_db + i * step_db);
  return out;
}

}  // namespace sakf::harness
