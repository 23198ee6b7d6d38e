#include "econoforge/store/csv.hpp"

#include "econoforge/core/errors.hpp"

namespace econoforge::store {

std::vector<CsvRow> parse_csv(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  std::size_t line = 1;
  std::size_t col = 1;
  bool row_has_content = false;
  row.line = 1;

  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&] {
    if (row_has_content) {
      end_field();
      rows.push_back(std::move(row));
    }
    row = CsvRow{};
    field.clear();
    row_has_content = false;
  };

  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '"' && field.empty()) {
      // quoted field
      const std::size_t start_line = line, start_col = col;
      if (!row_has_content) row.line = line;
      row_has_content = true;
      ++i;
      ++col;
      bool closed = false;
      while (i < text.size()) {
        const char d = text[i];
        if (d == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field.push_back('"');
            i += 2;
            col += 2;
            continue;
          }
          ++i;
          ++col;
          closed = true;
          break;
        }
        if (d == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
        field.push_back(d);
        ++i;
      }
      if (!closed) throw ParseError(start_line, start_col, "unterminated quoted field");
      if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
        throw ParseError(line, col, "unexpected character after closing quote");
      }
      continue;
    }
    if (c == ',') {
      if (!row_has_content) row.line = line;
      row_has_content = true;
      end_field();
      ++i;
      ++col;
    } else if (c == '\r' || c == '\n') {
      end_row();
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      ++i;
      ++line;
      col = 1;
      row.line = line;
    } else {
      if (c == '"') throw ParseError(line, col, "quote inside an unquoted field");
      if (!row_has_content) row.line = line;
      row_has_content = true;
      field.push_back(c);
      ++i;
      ++col;
    }
  }
  end_row();
  return rows;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += csv_escape(fields[i]);
  }
  out.push_back('\n');
  return out;
}

}  // namespace econoforge::store
