#include "sakf/complexity.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "sakf/errors.hpp"
#include "sakf/estimation.hpp"
#include "sakf/kalman.hpp"
#include "sakf/rng.hpp"

namespace sakf::harness {

double ComplexityReport::slope(Method m) const {
  for (const auto& [method, s] : slopes) {
    if (method == m) return s;
  }
  throw ConfigError("no complexity slope recorded for method '" + std::string(method_name(m)) + "'");
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DimensionError("slope fit needs at least two paired points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  return sxy / sxx;
}

std::pair<int, int> array_shape_for(int num_elements) {
  if (num_elements < 1) throw ConfigError("element count must be positive");
  int p = static_cast<int>(std::floor(std::sqrt(static_cast<double>(num_elements))));
  while (num_elements % p != 0) --p;
  return {p, num_elements / p};
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_per_call(const std::function<void()>& kernel, int repetitions) {
  constexpr double kMinSample = 2e-3;
  auto time_batch = [&](long batch) {
    const auto start = Clock::now();
    for (long i = 0; i < batch; ++i) kernel();
    return std::chrono::duration<double>(Clock::now() - start).count();
  };
  const double one = std::max(time_batch(1), 1e-9);
  const long batch = std::clamp(static_cast<long>(std::ceil(kMinSample / one)), 1L, 1000000L);
  std::vector<double> samples;
  for (int r = 0; r < repetitions; ++r) samples.push_back(time_batch(batch) / static_cast<double>(batch));
  std::nth_element(samples.begin(), samples.begin() + samples.size() / 2, samples.end());
  return samples[samples.size() / 2];
}

}  // namespace

ComplexityReport complexity_bench(std::span<const int> sizes, int repetitions, const std::vector<Method>& methods) {
  if (sizes.empty()) throw ConfigError("no sizes given");
  if (!std::is_sorted(sizes.begin(), sizes.end())) throw ConfigError("sizes must be sorted ascending");
  if (repetitions < 1) throw ConfigError("repetitions must be at least 1");

  ComplexityReport report;
  Rng rng(20240);
  ComplexNormal noise(1.0);
  volatile double sink = 0.0;

  for (int n : sizes) {
    const auto [rows, cols] = array_shape_for(n);
    const array::ArrayConfig arr(rows, cols, 0.5, 1.0);
    const std::vector<array::AnglePair> angles = {{deg_to_rad(20.0), deg_to_rad(50.0)}, {deg_to_rad(-35.0), deg_to_rad(65.0)}};

    CVector y = array::steering_vector(arr, angles[0]) + 0.3 * array::steering_vector(arr, angles[1]);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += 0.1 * noise(rng);
    const cdouble pilot = std::polar(1.0, kPi / 4.0);
    CVector h_ls(n);

    estimation::AoaEstimate aoa;
    aoa.angles = angles;
    aoa.est_num_paths = 2;
    aoa.est_noise_var = 0.01;
    std::vector<estimation::TransferFactors> factors;
    for (const auto& a : angles) factors.push_back(estimation::transfer_factors(a, arr));
    kalman::CsiMatrixView observed(rows, cols);
    kalman::CsiMatrixView part(rows, cols);
    kalman::CsiMatrixView stage(rows, cols);
    kalman::CsiMatrixView sum(rows, cols);

    CMatrix basis(n, 2);
    basis.col(0) = array::steering_vector(arr, angles[0]);
    basis.col(1) = array::steering_vector(arr, angles[1]);
    const CMatrix rhh = basis * basis.adjoint();

    for (Method m : methods) {
      std::function<void()> kernel;
      switch (m) {
        case Method::LS:
          kernel = [&] {
            h_ls.noalias() = y / pilot;
            sink = sink + h_ls(0).real();
          };
          break;
        case Method::SAKF:
          kernel = [&] {
            observed.noalias() = Eigen::Map<const kalman::CsiMatrixView>(y.data(), rows, cols) / pilot;
            sum.setZero();
            for (const auto& f : factors) {
              kalman::filter_matrix(observed, f, aoa.est_noise_var, part, stage);
              sum += part;
            }
            sink = sink + sum(0, 0).real();
          };
          break;
        case Method::MMSE:
          kernel = [&] {
            h_ls.noalias() = y / pilot;
            const auto out = estimation::mmse_estimate(h_ls, rhh, aoa.est_noise_var);
            sink = sink + out.estimate(0).real();
          };
          break;
      }
      report.rows.push_back({m, n, seconds_per_call(kernel, repetitions)});
    }
  }

  for (Method m : methods) {
    std::vector<double> x;
    std::vector<double> t;
    for (const auto& r : report.rows) {
      if (r.method != m) continue;
      x.push_back(r.num_elements);
      t.push_back(r.median_seconds);
    }
    if (x.size() >= 2) report.slopes.emplace_back(m, loglog_slope(x, t));
  }
  return report;
}

}  // namespace sakf::harness
