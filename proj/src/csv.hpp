#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wpenv::csv {

using Row = std::vector<std::string>;

struct Table {
  Row header;
  std::vector<Row> rows;
  /// 1-based physical line where each row starts, for diagnostics.
  std::vector<std::size_t> row_lines;
};

/// RFC 4180 reader: quoted fields, doubled quotes, embedded newlines.
/// Returns nullopt with `error` set on an unterminated quote or stray
/// characters after a closing quote.
std::optional<Table> parse(std::string_view content, std::string* error = nullptr);

}  // namespace wpenv::csv
