#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "saltplan/types.hpp"

namespace saltplan::io {

/// Minimal RFC 4180 table: first row is the header, fields may be
/// double-quoted (needed for WKT geometry, which contains commas).
class CsvTable {
 public:
  static CsvTable parse(std::string_view text);

  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t rows() const noexcept { return rows_.size(); }
  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;
  const std::string& at(std::size_t row, std::size_t col) const;
  // 1-based line number of a data row, for error messages.
  std::size_t line_of(std::size_t row) const { return lines_.at(row); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> lines_;
};

std::string csv_escape(std::string_view field);

double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);
bool parse_bool(std::string_view text, std::string_view what);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

Polyline parse_wkt_linestring(std::string_view text);
std::string format_wkt_linestring(const Polyline& line);

std::string read_file(const std::filesystem::path& path);
/// Write-temp-then-rename so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

/// 64-bit FNV-1a, used to fingerprint run configurations.
std::uint64_t fnv1a(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t value);

}  // namespace saltplan::io
