#include "csv.hpp"

namespace wpenv::csv {

std::optional<Table> parse(std::string_view content, std::string* error) {
  auto fail = [&](std::string message) -> std::optional<Table> {
    if (error) *error = std::move(message);
    return std::nullopt;
  };

  std::vector<Row> rows;
  std::vector<std::size_t> lines;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool after_quote = false;
  bool row_has_content = false;
  std::size_t line = 1;
  std::size_t row_line = 1;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    after_quote = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    lines.push_back(row_line);
    row.clear();
    row_has_content = false;
  };

  for (std::size_t i = 0; i < content.size(); ++i) {
    char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
          after_quote = true;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == ',') {
      end_field();
      row_has_content = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < content.size() && content[i + 1] == '\n') ++i;
      if (row_has_content || !field.empty() || after_quote) end_row();
      ++line;
      row_line = line;
    } else if (c == '"') {
      if (!field.empty() || after_quote) return fail("unexpected quote on line " + std::to_string(line));
      in_quotes = true;
      row_has_content = true;
    } else {
      if (after_quote) return fail("characters after closing quote on line " + std::to_string(line));
      field += c;
      row_has_content = true;
    }
  }
  if (in_quotes) return fail("unterminated quoted field starting on line " + std::to_string(row_line));
  if (row_has_content || !field.empty()) end_row();

  if (rows.empty()) return fail("missing header row");
  Table table;
  table.header = std::move(rows.front());
  table.rows.assign(std::make_move_iterator(rows.begin() + 1), std::make_move_iterator(rows.end()));
  table.row_lines.assign(lines.begin() + 1, lines.end());
  return table;
}

}  // namespace wpenv::csv
