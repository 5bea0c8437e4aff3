#pragma once

#include "rmrc/fem.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rmrc::io {

/// Binary snapshot: "RMRC1", u32 LE count, count f64 LE values.
std::string encode_coefficients(const Vector& u);
Vector decode_coefficients(std::string_view bytes);

/// Writes `path` (binary) and `path`.meta (level, p, parameter entries, seed).
void write_snapshot(const std::filesystem::path& path, const Snapshot& s, int level);
/// Reads the binary file and, when present, its metadata sidecar.
Snapshot read_snapshot(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_table(const std::filesystem::path& path, const Table& table);
Table read_table(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace rmrc::io
