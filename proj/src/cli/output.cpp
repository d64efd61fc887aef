// SPDX-License-Identifier: Apache-2.0
#include "avf/output.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace avf {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary density tables assume a little-endian host");

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

template <class T>
void put(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T value{};
  if (!is.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw std::runtime_error("truncated density table");
  return value;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view raw) {
  if (raw.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(raw);
  std::string out = "\"";
  for (char c : raw) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << csv_field(header[i]);
  out << "\r\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << "\r\n";
  }
}

void write_density_csv(const std::filesystem::path& path, const DensityGrid& grid) {
  std::vector<std::string> header;
  for (int k = 0; k < grid.dim(); ++k) header.push_back("x" + std::to_string(k + 1));
  header.push_back("value");
  std::vector<std::vector<double>> rows;
  rows.reserve(grid.node_count());
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    const PhaseVec y = grid.node(i);
    std::vector<double> row(y.data(), y.data() + y.size());
    row.push_back(grid.values[i]);
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

void write_density_binary(const std::filesystem::path& path, const DensityGrid& grid) {
  auto out = open_out(path);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.dim()));
  for (const auto& axis : grid.axes) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(axis.size()));
    put<double>(out, axis.front());
    put<double>(out, axis.back());
  }
  out.write(reinterpret_cast<const char*>(grid.values.data()),
            static_cast<std::streamsize>(grid.values.size() * sizeof(double)));
}

DensityGrid read_density_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  const auto dim = get<std::uint32_t>(in);
  std::vector<std::pair<double, double>> ranges;
  std::vector<std::uint32_t> counts;
  for (std::uint32_t k = 0; k < dim; ++k) {
    counts.push_back(get<std::uint32_t>(in));
    const double first = get<double>(in);
    ranges.emplace_back(first, get<double>(in));
  }
  DensityGrid grid;
  for (std::uint32_t k = 0; k < dim; ++k) {
    std::vector<double> axis(counts[k]);
    for (std::uint32_t i = 0; i < counts[k]; ++i)
      axis[i] = counts[k] == 1 ? ranges[k].first
                               : ranges[k].first + (ranges[k].second - ranges[k].first) * i /
                                                       (counts[k] - 1);
    grid.axes.push_back(std::move(axis));
  }
  grid.values.resize(grid.node_count());
  for (auto& v : grid.values) v = get<double>(in);
  return grid;
}

}  // namespace avf
