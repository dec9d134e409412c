#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "wpenv/corpus.hpp"

namespace wpenv {

enum class ExploitCategory { Core, Plugin, Theme, Uncategorized };

std::string_view to_string(ExploitCategory category) noexcept;
std::optional<ExploitCategory> category_from_string(std::string_view name) noexcept;

struct ParsedTitle {
  ExploitCategory category = ExploitCategory::Uncategorized;
  std::optional<std::string> product;
  std::optional<std::string> version_expr;
  std::string attack_type;

  friend bool operator==(const ParsedTitle&, const ParsedTitle&) = default;
};

/// Parses `WordPress [Core|Plugin|Theme] [Product] [Version] - Attack Type`.
///
/// Whitespace is collapsed and the prefix/keyword match is case-insensitive.
/// The version is the longest trailing token group before the first " - "
/// that parses as a version expression, so "Gallery 2 1.0" splits into
/// product "Gallery 2" and version "1.0". Without a keyword the remainder
/// must be a bare version expression (a Core title). Anything else yields
/// Uncategorized with every other field empty.
ParsedTitle parse_title(std::string_view title);

/// Inverse of parse_title for categorized values.
std::string render_title(const ParsedTitle& parsed);

using CategoryCounts = std::map<ExploitCategory, std::size_t>;

/// Category histogram over records whose title starts with "WordPress".
/// Every category key is present, zero when unused.
CategoryCounts classify_corpus(const Corpus& corpus);

}  // namespace wpenv
