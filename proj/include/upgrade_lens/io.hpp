#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ulens::io {

struct CsvRow {
  std::size_t line = 0;  // 1-based
  std::vector<std::string> fields;
};

/// Comma-separated rows with RFC 4180 quoting. Blank lines are skipped.
std::vector<CsvRow> parse_csv(std::string_view text);

/// Quotes a field when it contains a comma, quote, or newline.
std::string csv_field(std::string_view value);

/// Lowercase hex SHA-256 of the raw bytes.
std::string sha256_hex(std::string_view bytes);

std::string read_text(const std::string& path);
void write_text(const std::string& path, std::string_view text);

}  // namespace ulens::io
