#include "sakf/results_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "sakf/errors.hpp"

namespace sakf::harness {

OutputFormat parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "plotdata" || name == "plot-data") return OutputFormat::PlotData;
  throw ConfigError("unknown output format '" + std::string(name) + "' (expected csv or plotdata)");
}

namespace {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), ptr);
}

template <class T>
T parse_field(std::string_view field, int line_no) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw std::runtime_error("line " + std::to_string(line_no) + ": bad field '" + std::string(field) + "'");
  return value;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = line.find(',');
    out.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

void write_csv(std::ostream& out, const BerTable& table) {
  out << kCsvHeader << '\n';
  for (const auto& r : table.rows) {
    out << method_name(r.method) << ',' << format_double(r.snr_db) << ',' << r.num_bits << ',' << r.num_errors << ','
        << format_double(r.ber) << ',' << format_double(r.channel_mse) << ',' << format_double(r.wall_time_s) << '\n';
  }
}

BerTable parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("missing or unexpected CSV header");
  BerTable table;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 7) throw std::runtime_error("line " + std::to_string(line_no) + ": expected 7 fields");
    BerRow r;
    r.method = parse_method(f[0]);
    r.snr_db = parse_field<double>(f[1], line_no);
    r.num_bits = parse_field<std::uint64_t>(f[2], line_no);
    r.num_errors = parse_field<std::uint64_t>(f[3], line_no);
    r.ber = parse_field<double>(f[4], line_no);
    r.channel_mse = parse_field<double>(f[5], line_no);
    r.wall_time_s = parse_field<double>(f[6], line_no);
    table.rows.push_back(r);
  }
  return table;
}

std::vector<std::filesystem::path> write_plot_data(const std::filesystem::path& dir, const BerTable& table) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());

  std::vector<Method> methods;
  for (const auto& r : table.rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
  }
  std::vector<std::filesystem::path> written;
  for (Method m : methods) {
    const auto path = dir / ("ber_" + std::string(method_name(m)) + ".dat");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << "# snr_db ber (" << method_name(m) << ")\n";
    for (const auto& r : table.rows_for(m)) out << format_double(r.snr_db) << ' ' << format_double(r.ber) << '\n';
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
    written.push_back(path);
  }
  return written;
}

void emit_results(const BerTable& table, const std::filesystem::path& path, OutputFormat format) {
  if (table.rows.empty()) throw std::runtime_error("refusing to emit an empty result table");
  if (format == OutputFormat::PlotData) {
    write_plot_data(path, table);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_csv(out, table);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace sakf::harness
