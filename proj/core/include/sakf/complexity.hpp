#pragma once

#include <span>
#include <vector>

#include "sakf/experiment_config.hpp"

namespace sakf::harness {

struct ComplexityRow {
  Method method = Method::LS;
  int num_elements = 0;        // N = P*Q
  double median_seconds = 0.0; // per CSI vector
};

struct ComplexityReport {
  std::vector<ComplexityRow> rows;
  std::vector<std::pair<Method, double>> slopes;  // log-log slope of time vs N

  double slope(Method m) const;
};

// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

// Near-square P x Q factorization of N (P the largest divisor <= sqrt(N)).
std::pair<int, int> array_shape_for(int num_elements);

// Per-vector estimation cost: LS division; SAKF = LS + two-path matrix filter
// (AoA search excluded); MMSE = LS + dense R_hh solve. Sizes must ascend.
ComplexityReport complexity_bench(std::span<const int> sizes, int repetitions,
                                  const std::vector<Method>& methods = {Method::LS, Method::SAKF, Method::MMSE});

}  // namespace sakf::harness
