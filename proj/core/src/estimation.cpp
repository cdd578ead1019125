#include "sakf/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/Cholesky>

#include "sakf/errors.hpp"

namespace sakf::estimation {

namespace {

constexpr double kUnitModulusTol = 1e-9;

void require_unit_modulus(cdouble d) {
  if (std::abs(std::abs(d) - 1.0) > kUnitModulusTol)
    throw ContractViolation("preamble symbol must have unit modulus");
}

}  // namespace

CVector ls_estimate(const Eigen::Ref<const CVector>& y, cdouble d) {
  require_unit_modulus(d);
  return y / d;
}

channel::CsiGrid ls_estimate_grid(const channel::CsiGrid& received, const CMatrix& preamble) {
  if (preamble.rows() != received.num_subcarriers() || preamble.cols() != received.num_symbols())
    throw DimensionError("preamble grid does not match the received grid");
  channel::CsiGrid out(received.num_subcarriers(), received.num_symbols(), received.matrix());
  for (int m = 0; m < received.num_symbols(); ++m) {
    for (int n = 0; n < received.num_subcarriers(); ++n) {
      const cdouble d = preamble(n, m);
      require_unit_modulus(d);
      out.at(n, m) /= d;
    }
  }
  return out;
}

StackedCsi stack_csi(channel::CsiGrid grid) {
  StackedCsi s;
  s.num_subcarriers = grid.num_subcarriers();
  s.num_symbols = grid.num_symbols();
  s.matrix = std::move(grid.matrix());
  return s;
}

StackedCsi stack_csi(const std::vector<std::vector<CVector>>& per_position) {
  if (per_position.empty() || per_position.front().empty()) throw DimensionError("no CSI estimates to stack");
  const int nc = static_cast<int>(per_position.size());
  const int ms = static_cast<int>(per_position.front().size());
  const auto elements = per_position.front().front().size();
  if (elements == 0) throw DimensionError("empty CSI vector");

  StackedCsi s;
  s.num_subcarriers = nc;
  s.num_symbols = ms;
  s.matrix.resize(elements, static_cast<Eigen::Index>(nc) * ms);
  for (int n = 0; n < nc; ++n) {
    if (static_cast<int>(per_position[static_cast<std::size_t>(n)].size()) != ms)
      throw DimensionError("subcarrier " + std::to_string(n) + " is missing symbol estimates");
    for (int m = 0; m < ms; ++m) {
      const CVector& h = per_position[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)];
      if (h.size() != elements) throw DimensionError("CSI vectors differ in length");
      s.matrix.col(static_cast<Eigen::Index>(m) * nc + n) = h;
    }
  }
  return s;
}

channel::CsiGrid unstack_csi(StackedCsi stacked) {
  return channel::CsiGrid(stacked.num_subcarriers, stacked.num_symbols, std::move(stacked.matrix));
}

SubspaceDecomp hermitian_eigen(const CMatrix& hermitian) {
  if (hermitian.rows() == 0 || hermitian.rows() != hermitian.cols()) throw DimensionError("expected a square matrix");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition did not converge");
  // Eigen returns ascending order.
  SubspaceDecomp d;
  d.eigenvalues = solver.eigenvalues().reverse();
  d.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return d;
}

CovarianceResult sample_covariance(const CMatrix& snapshots) {
  if (snapshots.rows() == 0 || snapshots.cols() == 0) throw DimensionError("empty snapshot matrix");
  const auto n = snapshots.rows();
  CovarianceResult out;
  out.covariance = CMatrix::Zero(n, n);
  out.covariance.selfadjointView<Eigen::Lower>().rankUpdate(snapshots, 1.0 / static_cast<double>(snapshots.cols()));
  out.covariance = out.covariance.selfadjointView<Eigen::Lower>();
  out.decomp = hermitian_eigen(out.covariance);
  return out;
}

CovarianceResult sample_covariance(const StackedCsi& stacked) { return sample_covariance(stacked.matrix); }

MdlResult mdl_order(std::span<const double> eigenvalues, double num_snapshots) {
  const int n = static_cast<int>(eigenvalues.size());
  if (n < 2) throw DimensionError("MDL needs at least two eigenvalues");
  if (!(num_snapshots >= 1.0)) throw DomainError("MDL needs at least one snapshot");

  MdlResult result;
  const double largest = *std::max_element(eigenvalues.begin(), eigenvalues.end());
  // Relative floor keeps log() finite on rank-deficient (noiseless) covariances.
  const double floor = largest > 0.0 ? largest * 1e-12 : std::numeric_limits<double>::min();
  std::vector<double> lambda(eigenvalues.begin(), eigenvalues.end());
  for (double& v : lambda) {
    if (!(v > floor)) {
      v = floor;
      result.clamped_eigenvalues = true;
    }
  }
  std::sort(lambda.begin(), lambda.end(), std::greater<>());

  const double log_k = std::log(num_snapshots);
  result.criterion.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const int tail = n - k;
    double sum = 0.0;
    double log_sum = 0.0;
    for (int i = k; i < n; ++i) {
      sum += lambda[static_cast<std::size_t>(i)];
      log_sum += std::log(lambda[static_cast<std::size_t>(i)]);
    }
    const double log_ratio = log_sum / tail - std::log(sum / tail);
    result.criterion[static_cast<std::size_t>(k)] =
        -num_snapshots * tail * log_ratio + 0.5 * k * (2.0 * n - k) * log_k;
  }
  const auto best = std::min_element(result.criterion.begin(), result.criterion.end()) - result.criterion.begin();
  result.num_sources = std::clamp(static_cast<int>(best), 1, n - 1);
  return result;
}

double noise_power(std::span<const double> eigenvalues, int num_sources) {
  const int n = static_cast<int>(eigenvalues.size());
  if (num_sources < 0 || num_sources >= n) throw DomainError("source count must be below the element count");
  std::vector<double> lambda(eigenvalues.begin(), eigenvalues.end());
  std::sort(lambda.begin(), lambda.end(), std::greater<>());
  const double sum = std::accumulate(lambda.begin() + num_sources, lambda.end(), 0.0);
  return std::max(0.0, sum / (n - num_sources));
}

int MusicGrid::azimuth_points() const {
  return static_cast<int>(std::ceil((azimuth_max - azimuth_min) / step - 1e-9));
}

int MusicGrid::elevation_points() const {
  return static_cast<int>(std::floor((elevation_max - elevation_min) / step + 1e-9));
}

void MusicGrid::validate() const {
  if (!(step > 0.0)) throw ConfigError("MUSIC grid step must be positive");
  if (azimuth_points() < 1 || elevation_points() < 1) throw ConfigError("MUSIC grid is empty");
  if (exclusion_steps < 0) throw ConfigError("MUSIC exclusion zone must be non-negative");
}

namespace {

// Signal-subspace projection energy |E_s^H a|^2 for a separable steering vector.
class MusicEvaluator {
 public:
  MusicEvaluator(const SubspaceDecomp& decomp, int num_sources, const array::ArrayConfig& array)
      : array_(array),
        signal_adj_(decomp.eigenvectors.leftCols(num_sources).adjoint()),
        steering_(array.size()) {}

  double spectrum(double azimuth, double elevation) {
    const auto f = transfer_factors({azimuth, elevation}, array_);
    cdouble row = 1.0;
    for (int p = 0; p < array_.rows(); ++p) {
      cdouble entry = row;
      for (int q = 0; q < array_.cols(); ++q) {
        steering_(array_.linear_index(p, q)) = entry;
        entry *= f.along_q;
      }
      row *= f.along_p;
    }
    const double captured = (signal_adj_ * steering_).squaredNorm();
    const double n = static_cast<double>(array_.size());
    const double residual = std::max(n - captured, n * 1e-15);
    return 1.0 / residual;
  }

 private:
  const array::ArrayConfig& array_;
  CMatrix signal_adj_;
  CVector steering_;
};

double parabolic_offset(double left, double mid, double right) {
  const double denom = left - 2.0 * mid + right;
  if (!(denom < 0.0)) return 0.0;
  return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
}

}  // namespace

double music_spectrum(const SubspaceDecomp& decomp, int num_sources, const array::ArrayConfig& array,
                      const array::AnglePair& angles) {
  const int n = static_cast<int>(decomp.eigenvalues.size());
  if (n != array.size()) throw DimensionError("decomposition does not match the array size");
  if (num_sources < 1 || num_sources >= n) throw DomainError("source count must lie in [1, N-1]");
  MusicEvaluator eval(decomp, num_sources, array);
  return eval.spectrum(angles.azimuth, angles.elevation);
}

AoaEstimate estimate_aoas(const SubspaceDecomp& decomp, int num_sources, const array::ArrayConfig& array,
                          const MusicGrid& grid) {
  grid.validate();
  const int n = static_cast<int>(decomp.eigenvalues.size());
  if (n != array.size() || decomp.eigenvectors.rows() != n || decomp.eigenvectors.cols() != n)
    throw DimensionError("decomposition does not match the array size");
  if (num_sources < 1 || num_sources >= n) throw DomainError("source count must lie in [1, N-1]");

  const int na = grid.azimuth_points();
  const int ne = grid.elevation_points();
  MusicEvaluator eval(decomp, num_sources, array);

  // Log spectrum, row-major over (azimuth i, elevation j).
  std::vector<double> spec(static_cast<std::size_t>(na) * static_cast<std::size_t>(ne));
  auto at = [&](int i, int j) -> double& { return spec[static_cast<std::size_t>(i) * ne + j]; };
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < ne; ++j) at(i, j) = std::log(eval.spectrum(grid.azimuth_at(i), grid.elevation_at(j)));
  }

  struct Peak {
    double value;
    int i;
    int j;
  };
  std::vector<Peak> peaks;
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < ne; ++j) {
      const double v = at(i, j);
      bool is_max = true;
      for (int di = -1; di <= 1 && is_max; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const int ii = i + di;
          const int jj = j + dj;
          if (ii < 0 || ii >= na || jj < 0 || jj >= ne) continue;
          if (at(ii, jj) > v) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) peaks.push_back({v, i, j});
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.value > b.value; });

  std::vector<Peak> accepted;
  for (const Peak& p : peaks) {
    if (static_cast<int>(accepted.size()) == num_sources) break;
    const bool excluded = std::any_of(accepted.begin(), accepted.end(), [&](const Peak& a) {
      return std::abs(a.i - p.i) <= grid.exclusion_steps && std::abs(a.j - p.j) <= grid.exclusion_steps;
    });
    if (!excluded) accepted.push_back(p);
  }

  // A grid point already on the signal subspace to working precision is not refined.
  const double pole_level = -std::log(static_cast<double>(n) * 1e-10);

  AoaEstimate est;
  for (const Peak& p : accepted) {
    double di = 0.0;
    double dj = 0.0;
    const bool refine = p.value < pole_level;
    if (refine && p.i > 0 && p.i < na - 1) di = parabolic_offset(at(p.i - 1, p.j), p.value, at(p.i + 1, p.j));
    if (refine && p.j > 0 && p.j < ne - 1) dj = parabolic_offset(at(p.i, p.j - 1), p.value, at(p.i, p.j + 1));
    const double az = std::clamp(grid.azimuth_at(p.i) + di * grid.step, -kPi, std::nextafter(kPi, 0.0));
    const double el = std::clamp(grid.elevation_at(p.j) + dj * grid.step, 0.0, kPi);
    est.angles.push_back({az, el});
  }
  est.est_num_paths = static_cast<int>(est.angles.size());
  est.degraded = est.est_num_paths < num_sources;
  std::vector<double> lambda(decomp.eigenvalues.data(), decomp.eigenvalues.data() + n);
  est.est_noise_var = noise_power(lambda, num_sources);
  return est;
}

AoaEstimate sense_paths(const CMatrix& snapshots, const array::ArrayConfig& array, const MusicGrid& grid) {
  const auto cov = sample_covariance(snapshots);
  const auto& ev = cov.decomp.eigenvalues;
  const auto mdl = mdl_order(std::span<const double>(ev.data(), static_cast<std::size_t>(ev.size())),
                             static_cast<double>(snapshots.cols()));
  return estimate_aoas(cov.decomp, mdl.num_sources, array, grid);
}

AoaEstimate sense_paths(const StackedCsi& stacked, const array::ArrayConfig& array, const MusicGrid& grid) {
  return sense_paths(stacked.matrix, array, grid);
}

TransferFactors transfer_factors(const array::AnglePair& angles, const array::ArrayConfig& array) {
  const double s = std::sin(angles.elevation);
  const double k = array.phase_constant();
  return {std::polar(1.0, -k * std::cos(angles.azimuth) * s), std::polar(1.0, -k * std::sin(angles.azimuth) * s)};
}

MmseFilter::MmseFilter(const CMatrix& r_hh, double noise_var) {
  if (r_hh.rows() == 0 || r_hh.rows() != r_hh.cols()) throw DimensionError("R_hh must be square");
  if (!(noise_var >= 0.0)) throw DomainError("noise variance must be non-negative");
  const double scale = std::max(r_hh.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if ((r_hh - r_hh.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale) throw ContractViolation("R_hh must be Hermitian");

  CMatrix regularized = r_hh;
  regularized.diagonal().array() += noise_var;
  Eigen::LLT<CMatrix> llt(regularized);
  bool well_posed = llt.info() == Eigen::Success;
  if (well_posed) {
    const RVector d = llt.matrixLLT().diagonal().real().cwiseAbs2();
    well_posed = d.minCoeff() > 1e-12 * d.maxCoeff();
  }
  if (well_posed) {
    // R M^{-1} = (M^{-1} R)^H for Hermitian R and M.
    weights_ = llt.solve(r_hh).adjoint();
  } else {
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(regularized);
    weights_ = r_hh * cod.pseudoInverse();
    least_squares_ = true;
  }
}

MmseResult mmse_estimate(const Eigen::Ref<const CVector>& h_ls, const CMatrix& r_hh, double noise_var) {
  if (h_ls.size() != r_hh.rows()) throw DimensionError("R_hh does not match the estimate length");
  MmseFilter filter(r_hh, noise_var);
  return {filter.apply(h_ls), filter.used_least_squares()};
}

CMatrix estimate_rhh(const CMatrix& samples) {
  if (samples.rows() == 0 || samples.cols() == 0) throw DimensionError("empty channel ensemble");
  CMatrix r = CMatrix::Zero(samples.rows(), samples.rows());
  r.selfadjointView<Eigen::Lower>().rankUpdate(samples, 1.0 / static_cast<double>(samples.cols()));
  return r.selfadjointView<Eigen::Lower>();
}

CMatrix estimate_rhh(std::span<const CVector> samples) {
  if (samples.empty()) throw DimensionError("empty channel ensemble");
  CMatrix stacked(samples.front().size(), static_cast<Eigen::Index>(samples.size()));
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (samples[k].size() != stacked.rows()) throw DimensionError("ensemble vectors differ in length");
    stacked.col(static_cast<Eigen::Index>(k)) = samples[k];
  }
  return estimate_rhh(stacked);
}

}  // namespace sakf::estimation
