#pragma once

#include <span>
#include <vector>

#include "sakf/array_geometry.hpp"
#include "sakf/channel.hpp"
#include "sakf/types.hpp"

namespace sakf::estimation {

// h_hat = y / d. Requires |d| = 1.
CVector ls_estimate(const Eigen::Ref<const CVector>& y, cdouble d);

// LS estimate at every (n, m) of a received preamble grid.
channel::CsiGrid ls_estimate_grid(const channel::CsiGrid& received, const CMatrix& preamble);

// (P*Q) x (Nc*Ms) matrix; column m*Nc + n holds h_hat_{n,m}.
struct StackedCsi {
  CMatrix matrix;
  int num_subcarriers = 0;
  int num_symbols = 0;

  auto column(int n, int m) const { return matrix.col(m * num_subcarriers + n); }
};

StackedCsi stack_csi(channel::CsiGrid grid);

// per_position[n][m] is the estimate at subcarrier n, symbol m.
StackedCsi stack_csi(const std::vector<std::vector<CVector>>& per_position);

channel::CsiGrid unstack_csi(StackedCsi stacked);

struct SubspaceDecomp {
  RVector eigenvalues;    // non-increasing
  CMatrix eigenvectors;   // column k pairs with eigenvalues(k)
};

struct CovarianceResult {
  CMatrix covariance;  // H H^H / K
  SubspaceDecomp decomp;
};

CovarianceResult sample_covariance(const StackedCsi& stacked);
CovarianceResult sample_covariance(const CMatrix& snapshots);

SubspaceDecomp hermitian_eigen(const CMatrix& hermitian);

struct MdlResult {
  int num_sources = 1;
  bool clamped_eigenvalues = false;  // some eigenvalues were floored before taking logs
  std::vector<double> criterion;     // MDL(k), k = 0 .. N-1
};

// Wax-Kailath MDL source count, clamped to [1, N-1].
MdlResult mdl_order(std::span<const double> eigenvalues, double num_snapshots);

// Mean of the smallest N - L eigenvalues.
double noise_power(std::span<const double> eigenvalues, int num_sources);

struct MusicGrid {
  double azimuth_min = deg_to_rad(-90.0);
  double azimuth_max = deg_to_rad(90.0);    // exclusive
  double elevation_min = 0.0;               // exclusive
  double elevation_max = deg_to_rad(90.0);  // inclusive
  double step = deg_to_rad(0.5);
  int exclusion_steps = 2;

  int azimuth_points() const;
  int elevation_points() const;
  double azimuth_at(int i) const { return azimuth_min + i * step; }
  double elevation_at(int j) const { return elevation_max - (elevation_points() - 1 - j) * step; }
  void validate() const;
};

struct AoaEstimate {
  std::vector<array::AnglePair> angles;
  int est_num_paths = 0;
  double est_noise_var = 0.0;
  bool degraded = false;  // fewer separable peaks than requested
};

// 1 / (a^H E_n E_n^H a) with E_n the trailing N - L eigenvectors.
double music_spectrum(const SubspaceDecomp& decomp, int num_sources, const array::ArrayConfig& array,
                      const array::AnglePair& angles);

AoaEstimate estimate_aoas(const SubspaceDecomp& decomp, int num_sources, const array::ArrayConfig& array,
                          const MusicGrid& grid = {});

// Covariance, MDL count, noise power and MUSIC in one pass over an LS stack.
AoaEstimate sense_paths(const StackedCsi& stacked, const array::ArrayConfig& array, const MusicGrid& grid = {});
AoaEstimate sense_paths(const CMatrix& snapshots, const array::ArrayConfig& array, const MusicGrid& grid = {});

// Per-element phase increments along the row (p) and column (q) axes.
struct TransferFactors {
  cdouble along_p{1.0, 0.0};
  cdouble along_q{1.0, 0.0};
};

TransferFactors transfer_factors(const array::AnglePair& angles, const array::ArrayConfig& array);

// W = R (R + s^2 I)^{-1}, computed once and applied to many estimates.
class MmseFilter {
 public:
  MmseFilter(const CMatrix& r_hh, double noise_var);

  CVector apply(const Eigen::Ref<const CVector>& h_ls) const { return weights_ * h_ls; }
  CMatrix apply_all(const CMatrix& h_ls_columns) const { return weights_ * h_ls_columns; }

  const CMatrix& weights() const { return weights_; }
  // The regularized covariance was singular and a least-squares solve was used.
  bool used_least_squares() const { return least_squares_; }

 private:
  CMatrix weights_;
  bool least_squares_ = false;
};

struct MmseResult {
  CVector estimate;
  bool used_least_squares = false;
};

MmseResult mmse_estimate(const Eigen::Ref<const CVector>& h_ls, const CMatrix& r_hh, double noise_var);

// Sample mean of h h^H over the ensemble columns.
CMatrix estimate_rhh(const CMatrix& samples);
CMatrix estimate_rhh(std::span<const CVector> samples);

}  // namespace sakf::estimation
