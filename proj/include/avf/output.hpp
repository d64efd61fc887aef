// SPDX-License-Identifier: Apache-2.0
//
// Artifact writers. CSV follows RFC 4180 (CRLF line ends, quoted fields only
// when needed) with numbers printed to 17 significant digits.
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "avf/density.hpp"

namespace avf {

/// %.17g with '.' as decimal separator regardless of locale; non-finite
/// values print as nan, inf, -inf.
std::string format_double(double x);

std::string csv_field(std::string_view raw);

/// Header plus numeric rows.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// One row per grid node: x1..xD, value.
void write_density_csv(const std::filesystem::path& path, const DensityGrid& grid);

/// Little-endian table: u32 dim, then per axis (u32 count, f64 first,
/// f64 last), then the node values as f64 in row-major order.
void write_density_binary(const std::filesystem::path& path, const DensityGrid& grid);
DensityGrid read_density_binary(const std::filesystem::path& path);

}  // namespace avf
