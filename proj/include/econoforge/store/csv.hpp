#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace econoforge::store {

struct CsvRow {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// RFC-4180 reader: comma separated, double-quoted fields with "" escapes,
/// quoted fields may span lines, CRLF or LF line ends. A UTF-8 byte-order
/// mark is skipped. Empty lines are dropped. Throws ParseError on an
/// unterminated quote or stray characters after a closing quote.
std::vector<CsvRow> parse_csv(std::string_view text);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string csv_escape(std::string_view field);

/// Joins escaped fields with commas and appends "\n".
std::string csv_line(const std::vector<std::string>& fields);

}  // namespace econoforge::store
