#include "sakf/array_geometry.hpp"

#include <cmath>
#include <string>

#include "sakf/errors.hpp"

namespace sakf::array {

ArrayConfig::ArrayConfig(int rows, int cols, double spacing_m, double wavelength_m)
    : rows_(rows), cols_(cols), spacing_(spacing_m), wavelength_(wavelength_m) {
  if (rows < 1 || cols < 1) {
    throw ConfigError("array dimensions must be positive, got " + std::to_string(rows) + "x" +
                      std::to_string(cols));
  }
  if (!(spacing_m > 0.0) || !(wavelength_m > 0.0)) {
    throw ConfigError("array spacing and wavelength must be positive");
  }
}

ArrayConfig ArrayConfig::half_wavelength(int rows, int cols, double carrier_hz) {
  if (!(carrier_hz > 0.0)) throw ConfigError("carrier frequency must be positive");
  const double lambda = kSpeedOfLight / carrier_hz;
  return ArrayConfig(rows, cols, lambda / 2.0, lambda);
}

double ArrayConfig::phase_constant() const { return 2.0 * kPi * spacing_ / wavelength_; }

AnglePair AnglePair::checked(double azimuth, double elevation) {
  if (!(azimuth >= -kPi && azimuth < kPi)) throw DomainError("azimuth outside [-pi, pi)");
  if (!(elevation >= 0.0 && elevation <= kPi)) throw DomainError("elevation outside [0, pi]");
  return {azimuth, elevation};
}

AnglePair AnglePair::from_degrees(double azimuth_deg, double elevation_deg) {
  return checked(deg_to_rad(azimuth_deg), deg_to_rad(elevation_deg));
}

namespace {

cdouble unit_phase(double exponent) { return std::polar(1.0, exponent); }

}  // namespace

cdouble phase_shift(int p, int q, const AnglePair& angles, const ArrayConfig& cfg) {
  if (p < 0 || p >= cfg.rows() || q < 0 || q >= cfg.cols()) {
    throw IndexError("element (" + std::to_string(p) + ", " + std::to_string(q) +
                     ") outside the array");
  }
  if (p == 0 && q == 0) return {1.0, 0.0};
  const double s = std::sin(angles.elevation);
  const double u = std::cos(angles.azimuth) * s;
  const double v = std::sin(angles.azimuth) * s;
  return unit_phase(-cfg.phase_constant() * (p * u + q * v));
}

CVector steering_vector(const ArrayConfig& cfg, const AnglePair& angles) {
  CVector a(cfg.size());
  const double s = std::sin(angles.elevation);
  const double ku = cfg.phase_constant() * std::cos(angles.azimuth) * s;
  const double kv = cfg.phase_constant() * std::sin(angles.azimuth) * s;
  for (int p = 0; p < cfg.rows(); ++p) {
    for (int q = 0; q < cfg.cols(); ++q) {
      a(cfg.linear_index(p, q)) = (p == 0 && q == 0) ? cdouble(1.0, 0.0) : unit_phase(-(p * ku + q * kv));
    }
  }
  return a;
}

CVector ls_beamformer(const CVector& steering) {
  if (steering.size() == 0) throw DimensionError("empty steering vector");
  const double norm2 = steering.squaredNorm();
  if (!(norm2 > 0.0)) throw DomainError("zero steering vector has no pseudo-inverse");
  return steering.conjugate() / norm2;
}

}  // namespace sakf::array
