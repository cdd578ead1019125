#include "sakf/modem.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "sakf/errors.hpp"
#include "sakf/rng.hpp"

namespace sakf::modem {

QamOrder qam_order_from_int(int order) {
  if (order == 4) return QamOrder::Qam4;
  if (order == 16) return QamOrder::Qam16;
  throw ConfigError("unsupported QAM order " + std::to_string(order) + " (expected 4 or 16)");
}

int bits_per_symbol(QamOrder order) { return order == QamOrder::Qam4 ? 2 : 4; }

namespace {

// Gray level per axis: 0 -> +1, 1 -> -1 for one bit; 00 -> +1, 01 -> +3, 10 -> -1, 11 -> -3 for two.
double axis_level(unsigned bits, int bits_per_axis) {
  if (bits_per_axis == 1) return bits == 0 ? 1.0 : -1.0;
  const double sign = (bits & 2u) ? -1.0 : 1.0;
  const double mag = (bits & 1u) ? 3.0 : 1.0;
  return sign * mag;
}

std::vector<cdouble> build_constellation(int bps) {
  const int per_axis = bps / 2;
  const unsigned axis_mask = (1u << per_axis) - 1u;
  const double norm = per_axis == 1 ? std::sqrt(2.0) : std::sqrt(10.0);
  std::vector<cdouble> points;
  for (unsigned k = 0; k < (1u << bps); ++k) {
    const double i = axis_level((k >> per_axis) & axis_mask, per_axis);
    const double q = axis_level(k & axis_mask, per_axis);
    points.emplace_back(i / norm, q / norm);
  }
  return points;
}

}  // namespace

const std::vector<cdouble>& constellation(QamOrder order) {
  static const std::vector<cdouble> qam4 = build_constellation(2);
  static const std::vector<cdouble> qam16 = build_constellation(4);
  return order == QamOrder::Qam4 ? qam4 : qam16;
}

std::vector<cdouble> qam_modulate(std::span<const std::uint8_t> bits, QamOrder order) {
  const auto bps = static_cast<std::size_t>(bits_per_symbol(order));
  if (bits.size() % bps != 0) throw DimensionError("bit count is not a multiple of the bits per symbol");
  const auto& points = constellation(order);
  std::vector<cdouble> symbols(bits.size() / bps);
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    unsigned index = 0;
    for (std::size_t b = 0; b < bps; ++b) index = (index << 1) | (bits[s * bps + b] & 1u);
    symbols[s] = points[index];
  }
  return symbols;
}

BitStream qam_demodulate(std::span<const cdouble> symbols, QamOrder order) {
  const int bps = bits_per_symbol(order);
  const auto& points = constellation(order);
  BitStream bits(symbols.size() * static_cast<std::size_t>(bps));
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < points.size(); ++k) {
      const double dist = std::norm(symbols[s] - points[k]);
      if (dist < best_dist) {
        best_dist = dist;
        best = k;
      }
    }
    for (int b = 0; b < bps; ++b) {
      bits[s * static_cast<std::size_t>(bps) + static_cast<std::size_t>(b)] =
          static_cast<std::uint8_t>((best >> (bps - 1 - b)) & 1u);
    }
  }
  return bits;
}

BitStream random_bits(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  BitStream bits(count);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (i % 64 == 0) word = rng();
    bits[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
  }
  return bits;
}

SymbolGrid preamble_grid(int num_subcarriers, int num_symbols, std::uint64_t seed) {
  if (num_subcarriers < 1 || num_symbols < 1) throw DimensionError("preamble grid dimensions must be positive");
  Rng rng(seed);
  std::uniform_int_distribution<int> quadrant(0, 3);
  SymbolGrid grid{CMatrix(num_subcarriers, num_symbols), GridRole::Preamble};
  for (int m = 0; m < num_symbols; ++m) {
    for (int n = 0; n < num_subcarriers; ++n) {
      grid.values(n, m) = std::polar(1.0, kPi / 4.0 + kPi / 2.0 * quadrant(rng));
    }
  }
  return grid;
}

SymbolGrid data_grid(std::span<const std::uint8_t> bits, int num_subcarriers, int num_symbols, QamOrder order) {
  const auto expected = static_cast<std::size_t>(num_subcarriers) * static_cast<std::size_t>(num_symbols) *
                        static_cast<std::size_t>(bits_per_symbol(order));
  if (bits.size() != expected) throw DimensionError("bit count does not fill the data grid");
  const auto symbols = qam_modulate(bits, order);
  SymbolGrid grid{CMatrix(num_subcarriers, num_symbols), GridRole::Data};
  std::copy(symbols.begin(), symbols.end(), grid.values.data());
  return grid;
}

cdouble zf_detect(const Eigen::Ref<const CVector>& y, const Eigen::Ref<const CVector>& h_hat) {
  if (y.size() != h_hat.size()) throw DimensionError("received vector and CSI estimate differ in length");
  const double energy = h_hat.squaredNorm();
  if (!(energy > 0.0)) throw SingularChannelError("zero channel estimate");
  return h_hat.dot(y) / energy;
}

BitErrorCount bit_error_rate(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx) {
  if (tx.size() != rx.size()) throw DimensionError("bit streams differ in length");
  BitErrorCount count;
  count.total = tx.size();
  for (std::size_t i = 0; i < tx.size(); ++i) count.errors += (tx[i] != rx[i]) ? 1u : 0u;
  return count;
}

}  // namespace sakf::modem
