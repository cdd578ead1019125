#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sakf/array_geometry.hpp"
#include "sakf/types.hpp"

namespace sakf::channel {

struct PathParams {
  cdouble gain{1.0, 0.0};       // b_l; exactly 1 for the LoS path
  double delay = 0.0;           // seconds
  double doppler = 0.0;         // Hz
  array::AnglePair aoa;         // at the base-station array
  array::AnglePair aod;         // at the user array
  double gain_variance = 0.0;   // variance the NLoS gain was drawn from
};

using PathSet = std::vector<PathParams>;

// Per-symbol frequency offset (Hz) and timing offset (s).
struct OffsetProcess {
  std::vector<double> freq_offset;
  std::vector<double> timing_offset;

  static OffsetProcess zero(int num_symbols);
  static OffsetProcess constant(int num_symbols, double freq_hz, double timing_s);
};

struct SimWaveformConfig {
  double carrier_hz = 28e9;
  double subcarrier_spacing_hz = 480e3;
  int num_subcarriers = 256;
  int num_symbols = 64;
  double guard_s = (144.0 / 2048.0) / 480e3;
  double tx_power_w = 1.0;
  double noise_var_w = 4.9177e-12;
  int num_paths = 2;

  double symbol_duration() const { return 1.0 / subcarrier_spacing_hz + guard_s; }
  int num_positions() const { return num_subcarriers * num_symbols; }
  void validate() const;
};

// Draw ranges for sample_paths. Angles in radians.
struct PathSamplingBounds {
  double aoa_azimuth_min = deg_to_rad(-60.0);
  double aoa_azimuth_max = deg_to_rad(60.0);
  double aoa_elevation_min = deg_to_rad(30.0);
  double aoa_elevation_max = deg_to_rad(80.0);
  double aod_azimuth_min = deg_to_rad(-60.0);
  double aod_azimuth_max = deg_to_rad(60.0);
  double aod_elevation_min = deg_to_rad(30.0);
  double aod_elevation_max = deg_to_rad(80.0);
  double max_delay_s = 0.2 / 480e3;
  double max_doppler_hz = 1e3;
  double nlos_gain_variance = 0.1;        // relative to the unit LoS gain
  double min_aoa_azimuth_separation = deg_to_rad(10.0);

  static PathSamplingBounds defaults_for(const SimWaveformConfig& cfg);
  void validate() const;
};

// Complex CSI per (subcarrier n, symbol m, element). Stored as an
// elements x (Nc*Ms) matrix whose column m*Nc + n holds h_{n,m}.
class CsiGrid {
 public:
  CsiGrid() = default;
  CsiGrid(int num_subcarriers, int num_symbols, int num_elements);
  CsiGrid(int num_subcarriers, int num_symbols, CMatrix columns);

  int num_subcarriers() const { return nc_; }
  int num_symbols() const { return ms_; }
  int num_elements() const { return static_cast<int>(data_.rows()); }
  int num_positions() const { return nc_ * ms_; }
  int column_index(int n, int m) const { return m * nc_ + n; }

  auto at(int n, int m) { return data_.col(column_index(n, m)); }
  auto at(int n, int m) const { return data_.col(column_index(n, m)); }

  CMatrix& matrix() { return data_; }
  const CMatrix& matrix() const { return data_; }

 private:
  int nc_ = 0;
  int ms_ = 0;
  CMatrix data_;
};

PathSet sample_paths(const SimWaveformConfig& cfg, const PathSamplingBounds& bounds, std::uint64_t seed);

// chi_l = a^T(aod_l) w with w the LS beamformer towards the LoS AoD.
std::vector<cdouble> tx_bf_gains(const PathSet& paths, const array::ArrayConfig& user_array);

CsiGrid true_csi(const PathSet& paths, const OffsetProcess& offsets, const SimWaveformConfig& cfg,
                 const array::ArrayConfig& bs_array, std::span<const cdouble> tx_gains);

// y_{n,m} = h_{n,m} d_{n,m} + noise; symbols is Nc x Ms. No modulus check.
CsiGrid apply_channel(const CsiGrid& truth, const CMatrix& symbols, double noise_var, std::uint64_t seed);

// As apply_channel, but requires |d_{n,m}| = 1.
CsiGrid received_preamble(const CsiGrid& truth, const CMatrix& preamble, double noise_var,
                          std::uint64_t seed);

// Per-element uplink SNR (linear).
double uplink_snr(const PathSet& paths, std::span<const cdouble> tx_gains, double tx_power_w,
                  double noise_var);

double power_for_snr(double target_snr, const PathSet& paths, std::span<const cdouble> tx_gains,
                     double noise_var);

}  // namespace sakf::channel
