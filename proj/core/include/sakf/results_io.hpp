#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "sakf/simulation.hpp"

namespace sakf::harness {

enum class OutputFormat { Csv, PlotData };

OutputFormat parse_output_format(std::string_view name);

inline constexpr std::string_view kCsvHeader = "method,snr_db,num_bits,num_errors,ber,channel_mse,wall_time_s";

// Doubles are written in shortest round-trip form, so parse_csv(write_csv(t)) == t.
void write_csv(std::ostream& out, const BerTable& table);
BerTable parse_csv(std::istream& in);

// One "<dir>/ber_<method>.dat" per method with "snr_db ber" lines.
std::vector<std::filesystem::path> write_plot_data(const std::filesystem::path& dir, const BerTable& table);

// Writes CSV to `path`, or plot-data files into directory `path`. Throws std::runtime_error on I/O failure.
void emit_results(const BerTable& table, const std::filesystem::path& path, OutputFormat format);

}  // namespace sakf::harness
