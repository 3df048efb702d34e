#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mvsel {

// A parsed CSV document: header row plus data rows, each row remembering the
// 1-based source line it came from. Fields may be double-quoted ("" escapes a
// quote); CRLF and LF line ends are both accepted. Blank lines are skipped.
struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;
};

CsvTable read_csv(std::istream& in, std::string_view source);

// Strict numeric field parsers; throw Error(kParse) naming source and line.
double parse_real(std::string_view field, std::string_view source, std::size_t line);
std::uint64_t parse_unsigned(std::string_view field, std::string_view source, std::size_t line);
std::int64_t parse_signed(std::string_view field, std::string_view source, std::size_t line);

// Shortest text that round-trips exactly is not required; 17 significant
// digits always round-trips a double and keeps output byte-stable.
std::string format_real(double value, int significant_digits = 17);

// Quotes a field only when it contains a separator, quote or line break.
std::string csv_field(std::string_view text);

}  // namespace mvsel
