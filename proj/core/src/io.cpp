#include "saltplan/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace saltplan {

double polyline_length(const Polyline& line) {
  double total = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) {
    total += std::hypot(line[i].x - line[i - 1].x, line[i].y - line[i - 1].y);
  }
  return total;
}

}  // namespace saltplan

namespace saltplan::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

CsvTable CsvTable::parse(std::string_view text) {
  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
    bool blank = record.size() == 1 && trim(record[0]).empty();
    if (!blank) {
      if (table.header_.empty()) {
        for (auto& h : record) h = std::string(trim(h));
        table.header_ = std::move(record);
      } else {
        if (record.size() != table.header_.size()) {
          throw SchemaError(fmt::format(
              "csv line {}: expected {} fields, found {}", record_line,
              table.header_.size(), record.size()));
        }
        table.rows_.push_back(std::move(record));
        table.lines_.push_back(record_line);
      }
    }
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      end_record();
      ++line;
      record_line = line;
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw SchemaError("csv: unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  if (table.header_.empty()) throw SchemaError("csv: missing header row");
  return table;
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header_.begin());
}

std::size_t CsvTable::require_column(std::string_view name) const {
  if (auto c = column(name)) return *c;
  throw SchemaError(fmt::format("csv: missing column '{}'", name));
}

const std::string& CsvTable::at(std::size_t row, std::size_t col) const {
  return rows_.at(row).at(col);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

double parse_double(std::string_view text, std::string_view what) {
  auto s = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw SchemaError(fmt::format("{}: '{}' is not a number", what, text));
  }
  return value;
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
  auto s = trim(text);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw SchemaError(fmt::format("{}: '{}' is not an integer", what, text));
  }
  return value;
}

bool parse_bool(std::string_view text, std::string_view what) {
  std::string s(trim(text));
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "1" || s == "yes" || s == "t") return true;
  if (s == "false" || s == "0" || s == "no" || s == "f") return false;
  throw SchemaError(fmt::format("{}: '{}' is not a boolean", what, text));
}

std::string format_double(double value) { return fmt::format("{}", value); }

Polyline parse_wkt_linestring(std::string_view text) {
  auto s = trim(text);
  if (s.empty()) return {};
  std::string upper(s.substr(0, std::min<std::size_t>(s.size(), 10)));
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (upper.rfind("LINESTRING", 0) != 0) {
    throw SchemaError(fmt::format("geometry: expected LINESTRING, got '{}'",
                                  text));
  }
  auto open = s.find('(');
  auto close = s.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos ||
      close < open) {
    throw SchemaError(fmt::format("geometry: malformed WKT '{}'", text));
  }
  Polyline line;
  std::string_view body = s.substr(open + 1, close - open - 1);
  while (!body.empty()) {
    auto comma = body.find(',');
    auto pair = trim(body.substr(0, comma));
    auto space = pair.find_first_of(" \t");
    if (space == std::string_view::npos) {
      throw SchemaError(fmt::format("geometry: bad coordinate '{}'", pair));
    }
    line.push_back({parse_double(pair.substr(0, space), "geometry x"),
                    parse_double(trim(pair.substr(space)), "geometry y")});
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  if (line.size() < 2) {
    throw SchemaError("geometry: LINESTRING needs at least two points");
  }
  return line;
}

std::string format_wkt_linestring(const Polyline& line) {
  if (line.empty()) return {};
  std::string out = "LINESTRING (";
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (i) out += ", ";
    out += format_double(line[i].x);
    out += ' ';
    out += format_double(line[i].y);
  }
  out += ')';
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write '{}'", tmp.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(fmt::format("short write to '{}'", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

std::uint64_t fnv1a(std::string_view bytes) noexcept {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) { return fmt::format("{:016x}", value); }

}  // namespace saltplan::io
