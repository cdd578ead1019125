#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "sakf/types.hpp"

namespace sakf::test {

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline CVector random_cvector(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = {g(rng), g(rng)};
  return v;
}

inline CMatrix random_cmatrix(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  CMatrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = {g(rng), g(rng)};
  return m;
}

inline cdouble random_unit(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-kPi, kPi);
  return std::polar(1.0, u(rng));
}

#define EXPECT_CNEAR(a, b, tol)                          \
  do {                                                   \
    const std::complex<double> sakf_a_ = (a);            \
    const std::complex<double> sakf_b_ = (b);            \
    EXPECT_LE(std::abs(sakf_a_ - sakf_b_), (tol))        \
        << "lhs " << sakf_a_ << " rhs " << sakf_b_;      \
  } while (0)

}  // namespace sakf::test
