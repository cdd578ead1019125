#include "sakf/channel.hpp"

#include <cmath>
#include <string>

#include "sakf/errors.hpp"
#include "sakf/rng.hpp"

namespace sakf::channel {

OffsetProcess OffsetProcess::zero(int num_symbols) { return constant(num_symbols, 0.0, 0.0); }

OffsetProcess OffsetProcess::constant(int num_symbols, double freq_hz, double timing_s) {
  OffsetProcess o;
  o.freq_offset.assign(static_cast<std::size_t>(num_symbols), freq_hz);
  o.timing_offset.assign(static_cast<std::size_t>(num_symbols), timing_s);
  return o;
}

void SimWaveformConfig::validate() const {
  if (!(carrier_hz > 0.0)) throw ConfigError("carrier frequency must be positive");
  if (!(subcarrier_spacing_hz > 0.0)) throw ConfigError("subcarrier spacing must be positive");
  if (num_subcarriers < 1 || num_symbols < 1) throw ConfigError("grid dimensions must be positive");
  if (guard_s < 0.0) throw ConfigError("guard interval must be non-negative");
  if (!(tx_power_w > 0.0)) throw ConfigError("transmit power must be positive");
  if (!(noise_var_w >= 0.0)) throw ConfigError("noise variance must be non-negative");
  if (num_paths < 1) throw ConfigError("at least one propagation path is required");
}

PathSamplingBounds PathSamplingBounds::defaults_for(const SimWaveformConfig& cfg) {
  PathSamplingBounds b;
  b.max_delay_s = 0.2 / cfg.subcarrier_spacing_hz;
  return b;
}

void PathSamplingBounds::validate() const {
  auto check = [](double lo, double hi, const char* what) {
    if (!(lo <= hi)) throw ConfigError(std::string(what) + " sector is empty");
  };
  check(aoa_azimuth_min, aoa_azimuth_max, "AoA azimuth");
  check(aoa_elevation_min, aoa_elevation_max, "AoA elevation");
  check(aod_azimuth_min, aod_azimuth_max, "AoD azimuth");
  check(aod_elevation_min, aod_elevation_max, "AoD elevation");
  if (aoa_azimuth_min < -kPi || aoa_azimuth_max >= kPi || aod_azimuth_min < -kPi || aod_azimuth_max >= kPi)
    throw ConfigError("azimuth sectors must lie in [-180, 180) degrees");
  if (aoa_elevation_min < 0.0 || aoa_elevation_max > kPi || aod_elevation_min < 0.0 || aod_elevation_max > kPi)
    throw ConfigError("elevation sectors must lie in [0, 180] degrees");
  if (max_delay_s < 0.0 || max_doppler_hz < 0.0) throw ConfigError("delay/Doppler bounds must be non-negative");
  if (nlos_gain_variance < 0.0) throw ConfigError("NLoS gain variance must be non-negative");
  if (min_aoa_azimuth_separation < 0.0) throw ConfigError("azimuth separation must be non-negative");
}

CsiGrid::CsiGrid(int num_subcarriers, int num_symbols, int num_elements)
    : nc_(num_subcarriers), ms_(num_symbols), data_(CMatrix::Zero(num_elements, num_subcarriers * num_symbols)) {
  if (num_subcarriers < 1 || num_symbols < 1 || num_elements < 1) throw DimensionError("empty CSI grid");
}

CsiGrid::CsiGrid(int num_subcarriers, int num_symbols, CMatrix columns)
    : nc_(num_subcarriers), ms_(num_symbols), data_(std::move(columns)) {
  if (num_subcarriers < 1 || num_symbols < 1 || data_.rows() < 1) throw DimensionError("empty CSI grid");
  if (data_.cols() != static_cast<Eigen::Index>(num_subcarriers) * num_symbols)
    throw DimensionError("CSI column count does not match Nc*Ms");
}

PathSet sample_paths(const SimWaveformConfig& cfg, const PathSamplingBounds& bounds, std::uint64_t seed) {
  if (cfg.num_paths < 1) throw ConfigError("at least one propagation path is required");
  bounds.validate();

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  ComplexNormal nlos(bounds.nlos_gain_variance);

  PathSet paths;
  paths.reserve(static_cast<std::size_t>(cfg.num_paths));
  for (int l = 0; l < cfg.num_paths; ++l) {
    PathParams path;
    path.gain = (l == 0) ? cdouble(1.0, 0.0) : nlos(rng);
    path.gain_variance = (l == 0) ? 0.0 : bounds.nlos_gain_variance;
    path.delay = uniform(0.0, bounds.max_delay_s);
    path.doppler = uniform(-bounds.max_doppler_hz, bounds.max_doppler_hz);

    // Rejection keeps AoA azimuths apart; give up after a bounded number of draws.
    constexpr int kMaxAttempts = 1000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      path.aoa.azimuth = uniform(bounds.aoa_azimuth_min, bounds.aoa_azimuth_max);
      bool separated = true;
      for (const auto& prev : paths) {
        if (std::abs(prev.aoa.azimuth - path.aoa.azimuth) < bounds.min_aoa_azimuth_separation) separated = false;
      }
      if (separated) break;
    }
    path.aoa.elevation = uniform(bounds.aoa_elevation_min, bounds.aoa_elevation_max);
    path.aod.azimuth = uniform(bounds.aod_azimuth_min, bounds.aod_azimuth_max);
    path.aod.elevation = uniform(bounds.aod_elevation_min, bounds.aod_elevation_max);
    paths.push_back(path);
  }
  return paths;
}

std::vector<cdouble> tx_bf_gains(const PathSet& paths, const array::ArrayConfig& user_array) {
  if (paths.empty()) throw DimensionError("no paths");
  const CVector w = array::ls_beamformer(array::steering_vector(user_array, paths.front().aod));
  std::vector<cdouble> gains;
  gains.reserve(paths.size());
  for (const auto& path : paths) {
    gains.push_back(array::steering_vector(user_array, path.aod).transpose() * w);
  }
  return gains;
}

CsiGrid true_csi(const PathSet& paths, const OffsetProcess& offsets, const SimWaveformConfig& cfg,
                 const array::ArrayConfig& bs_array, std::span<const cdouble> tx_gains) {
  if (paths.size() != tx_gains.size()) throw DimensionError("path and transmit-gain counts differ");
  const auto ms = static_cast<std::size_t>(cfg.num_symbols);
  if (offsets.freq_offset.size() < ms || offsets.timing_offset.size() < ms)
    throw DimensionError("offset process shorter than the symbol count");

  CsiGrid grid(cfg.num_subcarriers, cfg.num_symbols, bs_array.size());
  const double ts = cfg.symbol_duration();
  const double amp = std::sqrt(cfg.tx_power_w);
  CMatrix& h = grid.matrix();

  for (std::size_t l = 0; l < paths.size(); ++l) {
    const PathParams& path = paths[l];
    const CVector a = array::steering_vector(bs_array, path.aoa);
    const cdouble scale = path.gain * amp * tx_gains[l];
    for (int m = 0; m < cfg.num_symbols; ++m) {
      const double doppler = path.doppler + offsets.freq_offset[static_cast<std::size_t>(m)];
      const double delay = path.delay + offsets.timing_offset[static_cast<std::size_t>(m)];
      const cdouble time_phase = std::polar(1.0, 2.0 * kPi * m * ts * doppler);
      for (int n = 0; n < cfg.num_subcarriers; ++n) {
        const cdouble freq_phase = std::polar(1.0, -2.0 * kPi * n * cfg.subcarrier_spacing_hz * delay);
        h.col(grid.column_index(n, m)) += (time_phase * freq_phase * scale) * a;
      }
    }
  }
  return grid;
}

CsiGrid apply_channel(const CsiGrid& truth, const CMatrix& symbols, double noise_var, std::uint64_t seed) {
  if (symbols.rows() != truth.num_subcarriers() || symbols.cols() != truth.num_symbols())
    throw DimensionError("symbol grid does not match the CSI grid");
  if (!(noise_var >= 0.0)) throw DomainError("noise variance must be non-negative");

  CsiGrid y(truth.num_subcarriers(), truth.num_symbols(), truth.matrix());
  CMatrix& data = y.matrix();
  for (int m = 0; m < truth.num_symbols(); ++m) {
    for (int n = 0; n < truth.num_subcarriers(); ++n) data.col(truth.column_index(n, m)) *= symbols(n, m);
  }
  if (noise_var > 0.0) {
    Rng rng(seed);
    ComplexNormal noise(noise_var);
    // Column-major fill order fixes the realization for a given seed.
    for (Eigen::Index k = 0; k < data.size(); ++k) data.data()[k] += noise(rng);
  }
  return y;
}

CsiGrid received_preamble(const CsiGrid& truth, const CMatrix& preamble, double noise_var, std::uint64_t seed) {
  for (Eigen::Index k = 0; k < preamble.size(); ++k) {
    if (std::abs(std::abs(preamble.data()[k]) - 1.0) > 1e-9)
      throw ContractViolation("preamble symbols must have unit modulus");
  }
  return apply_channel(truth, preamble, noise_var, seed);
}

namespace {

double effective_gain_power(const PathSet& paths, std::span<const cdouble> tx_gains) {
  if (paths.size() != tx_gains.size()) throw DimensionError("path and transmit-gain counts differ");
  double sum = 0.0;
  for (std::size_t l = 0; l < paths.size(); ++l) sum += std::norm(paths[l].gain * tx_gains[l]);
  return sum;
}

}  // namespace

double uplink_snr(const PathSet& paths, std::span<const cdouble> tx_gains, double tx_power_w, double noise_var) {
  if (!(noise_var > 0.0)) throw DomainError("noise variance must be positive");
  return tx_power_w * effective_gain_power(paths, tx_gains) / noise_var;
}

double power_for_snr(double target_snr, const PathSet& paths, std::span<const cdouble> tx_gains, double noise_var) {
  if (!(noise_var > 0.0)) throw DomainError("noise variance must be positive");
  if (!(target_snr >= 0.0)) throw DomainError("target SNR must be non-negative");
  const double g = effective_gain_power(paths, tx_gains);
  if (!(g > 0.0)) throw DomainError("all path gains are zero");
  return target_snr * noise_var / g;
}

}  // namespace sakf::channel
