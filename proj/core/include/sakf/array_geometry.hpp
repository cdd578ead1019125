#pragma once

#include "sakf/types.hpp"

namespace sakf::array {

// Uniform planar array of rows x cols elements.
class ArrayConfig {
 public:
  ArrayConfig(int rows, int cols, double spacing_m, double wavelength_m);

  // Half-wavelength UPA at the given carrier.
  static ArrayConfig half_wavelength(int rows, int cols, double carrier_hz);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return rows_ * cols_; }
  double spacing() const { return spacing_; }
  double wavelength() const { return wavelength_; }

  // 2*pi*d_a/lambda, the electrical spacing in radians.
  double phase_constant() const;

  int linear_index(int p, int q) const { return p * cols_ + q; }

 private:
  int rows_;
  int cols_;
  double spacing_;
  double wavelength_;
};

// Azimuth in [-pi, pi), elevation in [0, pi]; radians.
struct AnglePair {
  double azimuth = 0.0;
  double elevation = 0.0;

  static AnglePair checked(double azimuth, double elevation);
  static AnglePair from_degrees(double azimuth_deg, double elevation_deg);
};

// Phase of element (p, q) relative to the reference element (0, 0).
cdouble phase_shift(int p, int q, const AnglePair& angles, const ArrayConfig& cfg);

// Steering vector of length P*Q in p*Q + q order.
CVector steering_vector(const ArrayConfig& cfg, const AnglePair& angles);

// Pseudo-inverse of the row vector a^T, i.e. conj(a) / |a|^2.
CVector ls_beamformer(const CVector& steering);

}  // namespace sakf::array
