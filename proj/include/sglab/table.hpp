#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace sglab::table {

/// Nine significant digits, "inf"/"-inf"/"nan" for non-finite values.
std::string real(double value);

/// Tab-joined row terminated by '\n'.
std::string row(const std::vector<std::string>& cells);

std::vector<std::string> split(std::string_view line, char sep = '\t');
std::vector<std::string> split_ws(std::string_view line);

/// Parsed tab-separated file. Lines starting with '#' are metadata and
/// are skipped; the first remaining line is the header.
struct Tsv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;  // 1-based source line of each row

  /// Column index or throws ParseError naming the column.
  std::size_t column(std::string_view name) const;
};

Tsv parse_tsv(std::string_view text);
Tsv read_tsv(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

double parse_real(std::string_view cell, std::size_t line);
long long parse_int(std::string_view cell, std::size_t line);
unsigned long long parse_uint(std::string_view cell, std::size_t line);

}  // namespace sglab::table
