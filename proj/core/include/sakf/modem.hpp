#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sakf/types.hpp"

namespace sakf::modem {

enum class QamOrder : int { Qam4 = 4, Qam16 = 16 };

// Throws ConfigError on anything other than 4 or 16.
QamOrder qam_order_from_int(int order);
int bits_per_symbol(QamOrder order);

// One byte per bit, values 0 or 1.
using BitStream = std::vector<std::uint8_t>;

enum class GridRole { Preamble, Data };

// Nc x Ms symbols; entry (n, m) is carried by subcarrier n of OFDM symbol m.
struct SymbolGrid {
  CMatrix values;
  GridRole role = GridRole::Data;
};

// Gray-mapped, unit average energy. Point k carries the bits of k, MSB first;
// the first bit pair selects the in-phase level, the second the quadrature level.
const std::vector<cdouble>& constellation(QamOrder order);

std::vector<cdouble> qam_modulate(std::span<const std::uint8_t> bits, QamOrder order);

// Minimum-distance hard decision; ties go to the lowest constellation index.
BitStream qam_demodulate(std::span<const cdouble> symbols, QamOrder order);

BitStream random_bits(std::size_t count, std::uint64_t seed);

// Uniform QPSK phases, all of unit modulus.
SymbolGrid preamble_grid(int num_subcarriers, int num_symbols, std::uint64_t seed);

// Maps bits onto an Nc x Ms data grid, symbol k at (n, m) = (k % Nc, k / Nc).
SymbolGrid data_grid(std::span<const std::uint8_t> bits, int num_subcarriers, int num_symbols, QamOrder order);

// Single-stream ZF combiner (h^H h)^{-1} h^H y.
cdouble zf_detect(const Eigen::Ref<const CVector>& y, const Eigen::Ref<const CVector>& h_hat);

struct BitErrorCount {
  std::uint64_t errors = 0;
  std::uint64_t total = 0;
  double ratio() const { return total == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(total); }
};

BitErrorCount bit_error_rate(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx);

}  // namespace sakf::modem
