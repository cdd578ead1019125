#include <array>
#include <bit>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/QR>
#include <gtest/gtest.h>

#include "sakf/errors.hpp"
#include "sakf/modem.hpp"
#include "test_support.hpp"

using namespace sakf;
using namespace sakf::modem;

namespace {

// Brute-force nearest point, lowest index on ties.
int nearest_index(cdouble s, const std::vector<cdouble>& points) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(points.size()); ++k) {
    if (std::norm(s - points[k]) < std::norm(s - points[best])) best = k;
  }
  return best;
}

BitStream bits_of_index(int k, int bps) {
  BitStream b;
  for (int i = bps - 1; i >= 0; --i) b.push_back(static_cast<std::uint8_t>((k >> i) & 1));
  return b;
}

}  // namespace

TEST(QamOrder, Parsing) {
  EXPECT_EQ(qam_order_from_int(4), QamOrder::Qam4);
  EXPECT_EQ(qam_order_from_int(16), QamOrder::Qam16);
  EXPECT_THROW(qam_order_from_int(8), ConfigError);
  EXPECT_THROW(qam_order_from_int(64), ConfigError);
  EXPECT_EQ(bits_per_symbol(QamOrder::Qam4), 2);
  EXPECT_EQ(bits_per_symbol(QamOrder::Qam16), 4);
}

TEST(QamModulate, FourQamZeroBitsInFirstQuadrant) {
  const std::vector<std::uint8_t> bits = {0, 0};
  const auto s = qam_modulate(bits, QamOrder::Qam4);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_CNEAR(s[0], cdouble(1.0, 1.0) / std::sqrt(2.0), 1e-15);
}

TEST(QamModulate, UnitAverageEnergy) {
  for (auto order : {QamOrder::Qam4, QamOrder::Qam16}) {
    const auto& pts = constellation(order);
    ASSERT_EQ(pts.size(), static_cast<std::size_t>(order));
    double e = 0.0;
    for (auto p : pts) e += std::norm(p);
    EXPECT_NEAR(e / pts.size(), 1.0, 1e-12);
  }
}

TEST(QamModulate, SquareGridLevels) {
  const auto& pts = constellation(QamOrder::Qam16);
  const double unit = 1.0 / std::sqrt(10.0);
  for (auto p : pts) {
    for (double c : {p.real(), p.imag()}) {
      const double level = c / unit;
      EXPECT_TRUE(std::abs(std::abs(level) - 1.0) < 1e-12 || std::abs(std::abs(level) - 3.0) < 1e-12) << level;
    }
  }
}

TEST(QamModulate, NearestNeighboursDifferInOneBit) {
  for (auto order : {QamOrder::Qam4, QamOrder::Qam16}) {
    const auto& pts = constellation(order);
    double dmin = 1e9;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) dmin = std::min(dmin, std::abs(pts[i] - pts[j]));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        if (std::abs(std::abs(pts[i] - pts[j]) - dmin) < 1e-12) {
          EXPECT_EQ(std::popcount(static_cast<unsigned>(i ^ j)), 1) << i << " vs " << j;
        }
      }
    }
  }
}

TEST(QamModulate, Errors) {
  BitStream odd = {0, 1, 1};
  EXPECT_THROW(qam_modulate(odd, QamOrder::Qam4), DimensionError);
  EXPECT_THROW(qam_modulate(odd, QamOrder::Qam16), DimensionError);
}

TEST(QamDemodulate, ExhaustiveRoundTrip) {
  for (auto order : {QamOrder::Qam4, QamOrder::Qam16}) {
    const int bps = bits_per_symbol(order);
    for (int k = 0; k < static_cast<int>(order); ++k) {
      const BitStream b = bits_of_index(k, bps);
      const auto s = qam_modulate(b, order);
      EXPECT_CNEAR(s[0], constellation(order)[k], 1e-15);
      EXPECT_EQ(qam_demodulate(s, order), b);
    }
  }
}

TEST(QamDemodulate, OriginTieBreak) {
  const std::vector<cdouble> origin = {0.0};
  EXPECT_EQ(qam_demodulate(origin, QamOrder::Qam4), (BitStream{0, 0}));
  const auto& first = constellation(QamOrder::Qam4)[0];
  EXPECT_GT(first.real(), 0.0);
  EXPECT_GT(first.imag(), 0.0);
}

TEST(QamDemodulate, MatchesBruteForceNearestNeighbour) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g(0.0, 0.6);
  for (auto order : {QamOrder::Qam4, QamOrder::Qam16}) {
    const auto& pts = constellation(order);
    const int bps = bits_per_symbol(order);
    std::vector<cdouble> rx(20000);
    for (auto& r : rx) r = {g(rng), g(rng)};
    const auto bits = qam_demodulate(rx, order);
    ASSERT_EQ(bits.size(), rx.size() * bps);
    for (std::size_t i = 0; i < rx.size(); ++i) {
      const BitStream expected = bits_of_index(nearest_index(rx[i], pts), bps);
      for (int b = 0; b < bps; ++b) ASSERT_EQ(bits[i * bps + b], expected[b]) << "symbol " << i;
    }
  }
}

TEST(QamDemodulate, SmallPerturbationKeepsDecision) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> phase(-kPi, kPi), frac(0.0, 0.999);
  for (auto order : {QamOrder::Qam4, QamOrder::Qam16}) {
    const auto& pts = constellation(order);
    double dmin = 1e9;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) dmin = std::min(dmin, std::abs(pts[i] - pts[j]));
    for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
      for (int t = 0; t < 50; ++t) {
        const std::vector<cdouble> s = {pts[k] + std::polar(frac(rng) * dmin / 2.0, phase(rng))};
        EXPECT_EQ(qam_demodulate(s, order), bits_of_index(k, bits_per_symbol(order)));
      }
    }
  }
}

TEST(RandomBits, BinaryDeterministicBalanced) {
  const auto a = random_bits(100000, 3);
  EXPECT_EQ(a, random_bits(100000, 3));
  EXPECT_NE(a, random_bits(100000, 4));
  std::size_t ones = 0;
  for (auto b : a) {
    ASSERT_LE(b, 1);
    ones += b;
  }
  EXPECT_NEAR(static_cast<double>(ones) / a.size(), 0.5, 0.01);
}

TEST(PreambleGrid, UnitModulusDeterministicUniformPhases) {
  const auto g = preamble_grid(256, 64, 42);
  EXPECT_EQ(g.role, GridRole::Preamble);
  ASSERT_EQ(g.values.rows(), 256);
  ASSERT_EQ(g.values.cols(), 64);
  EXPECT_EQ(g.values, preamble_grid(256, 64, 42).values);

  std::array<int, 4> counts{};
  for (Eigen::Index k = 0; k < g.values.size(); ++k) {
    const cdouble d = g.values.data()[k];
    EXPECT_NEAR(std::abs(d), 1.0, 1e-15);
    const double a = std::arg(d);
    int bin = -1;
    for (int q = 0; q < 4; ++q) {
      const double target = std::remainder(kPi / 4 + q * kPi / 2, 2 * kPi);
      if (std::abs(std::remainder(a - target, 2 * kPi)) < 1e-12) bin = q;
    }
    ASSERT_GE(bin, 0) << "phase " << a;
    ++counts[bin];
  }
  for (int c : counts) EXPECT_NEAR(c / 16384.0, 0.25, 0.02);
  EXPECT_THROW(preamble_grid(0, 3, 1), DimensionError);
}

TEST(DataGrid, Layout) {
  const auto bits = random_bits(2 * 6 * 3, 8);
  const auto g = data_grid(bits, 6, 3, QamOrder::Qam4);
  EXPECT_EQ(g.role, GridRole::Data);
  const auto syms = qam_modulate(bits, QamOrder::Qam4);
  for (std::size_t k = 0; k < syms.size(); ++k) EXPECT_EQ(g.values(k % 6, k / 6), syms[k]);
  EXPECT_THROW(data_grid(bits, 6, 4, QamOrder::Qam4), DimensionError);
}

TEST(ZfDetect, WorkedExamples) {
  CVector h(1), y(1);
  const cdouble s(0.3, -0.7);
  h << 2.0;
  y << 2.0 * s;
  EXPECT_CNEAR(zf_detect(y, h), s, 1e-15);

  std::mt19937_64 rng(19);
  for (int t = 0; t < 50; ++t) {
    const CVector hh = test::random_cvector(16, rng);
    EXPECT_CNEAR(zf_detect(hh * s, hh), s, 1e-13);
  }
  EXPECT_THROW(zf_detect(CVector::Ones(3), CVector::Zero(3)), SingularChannelError);
  EXPECT_THROW(zf_detect(CVector::Ones(3), CVector::Ones(2)), DimensionError);
}

TEST(ZfDetect, MatchesLeastSquaresSolveAndScalesGracefully) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 100; ++t) {
    const CVector h = test::random_cvector(12, rng);
    const CVector e = test::random_cvector(12, rng, 1e-3);
    const CVector n = test::random_cvector(12, rng, 0.1);
    const cdouble s = test::random_unit(rng);
    const CVector y = h * s + n;
    const CVector h_hat = h + e;

    const CMatrix A = h_hat;
    const cdouble oracle = A.colPivHouseholderQr().solve(y)(0);
    const cdouble got = zf_detect(y, h_hat);
    EXPECT_CNEAR(got, oracle, 1e-12);

    const cdouble perfect = zf_detect(y, h);
    EXPECT_LE(std::abs(got - perfect), 10.0 * e.norm() / h.norm() * (1.0 + std::abs(perfect)));

    const cdouble c = cdouble(-1.3, 0.4);
    EXPECT_CNEAR(zf_detect(c * y, c * h_hat), got, 1e-10);
  }
}

TEST(BitErrorRate, Counting) {
  const auto a = random_bits(1000, 1);
  EXPECT_EQ(bit_error_rate(a, a).errors, 0u);
  EXPECT_EQ(bit_error_rate(a, a).ratio(), 0.0);

  BitStream inv = a;
  for (auto& b : inv) b ^= 1;
  EXPECT_EQ(bit_error_rate(a, inv).ratio(), 1.0);

  BitStream three = a;
  three[5] ^= 1;
  three[500] ^= 1;
  three[999] ^= 1;
  const auto c = bit_error_rate(a, three);
  EXPECT_EQ(c.errors, 3u);
  EXPECT_EQ(c.total, 1000u);
  EXPECT_DOUBLE_EQ(c.ratio(), 0.003);

  EXPECT_THROW(bit_error_rate(a, BitStream(999)), DimensionError);
  EXPECT_EQ(BitErrorCount{}.ratio(), 0.0);
}

TEST(Modem, NoiselessEndToEndIdentity) {
  std::mt19937_64 rng(29);
  const int nc = 32, ms = 8, n = 9;
  for (auto order : {QamOrder::Qam4, QamOrder::Qam16}) {
    const auto bits = random_bits(static_cast<std::size_t>(nc * ms * bits_per_symbol(order)), 31);
    const auto grid = data_grid(bits, nc, ms, order);
    std::vector<cdouble> detected;
    for (int m = 0; m < ms; ++m) {
      for (int k = 0; k < nc; ++k) {
        const CVector h = test::random_cvector(n, rng);
        detected.push_back(zf_detect(h * grid.values(k, m), h));
      }
    }
    // Column-major walk of the grid visits symbols in transmission order.
    EXPECT_EQ(qam_demodulate(detected, order), bits);
  }
}
