#include "wpenv/title.hpp"

#include "text.hpp"
#include "wpenv/version.hpp"

namespace wpenv {

namespace {

constexpr std::string_view kSeparator = " - ";

std::optional<ExploitCategory> keyword(std::string_view token) {
  if (text::iequals(token, "core")) return ExploitCategory::Core;
  if (text::iequals(token, "plugin")) return ExploitCategory::Plugin;
  if (text::iequals(token, "theme")) return ExploitCategory::Theme;
  return std::nullopt;
}

}  // namespace

std::string_view to_string(ExploitCategory category) noexcept {
  switch (category) {
    case ExploitCategory::Core: return "Core";
    case ExploitCategory::Plugin: return "Plugin";
    case ExploitCategory::Theme: return "Theme";
    case ExploitCategory::Uncategorized: return "Uncategorized";
  }
  return "Uncategorized";
}

std::optional<ExploitCategory> category_from_string(std::string_view name) noexcept {
  for (auto c : {ExploitCategory::Core, ExploitCategory::Plugin, ExploitCategory::Theme,
                 ExploitCategory::Uncategorized}) {
    if (text::iequals(name, to_string(c))) return c;
  }
  return std::nullopt;
}

ParsedTitle parse_title(std::string_view title) {
  const ParsedTitle uncategorized{};
  std::string normalized = text::collapse_whitespace(title);
  std::string_view s = normalized;

  if (!text::istarts_with(s, "wordpress ")) return uncategorized;
  s.remove_prefix(std::string_view("wordpress ").size());

  std::size_t dash = s.find(kSeparator);
  if (dash == std::string_view::npos) return uncategorized;
  std::string_view head = s.substr(0, dash);
  std::string_view attack = text::trim(s.substr(dash + kSeparator.size()));
  if (attack.empty()) return uncategorized;

  auto tokens = text::split_whitespace(head);
  std::optional<ExploitCategory> kw;
  if (!tokens.empty()) kw = keyword(tokens.front());
  if (kw) tokens.erase(tokens.begin());

  // An extension needs at least one product token in front of the version.
  bool needs_product = kw == ExploitCategory::Plugin || kw == ExploitCategory::Theme;
  std::size_t min_product = needs_product ? 1 : 0;

  std::size_t version_tokens = 0;
  for (std::size_t k = tokens.size() - std::min(tokens.size(), min_product); k > 0; --k) {
    std::vector<std::string_view> tail(tokens.end() - static_cast<std::ptrdiff_t>(k), tokens.end());
    if (try_parse_version_expr(text::join(tail, " "))) {
      version_tokens = k;
      break;
    }
  }

  std::vector<std::string_view> product_tokens(tokens.begin(),
                                               tokens.end() - static_cast<std::ptrdiff_t>(version_tokens));
  std::vector<std::string_view> version_part(tokens.end() - static_cast<std::ptrdiff_t>(version_tokens),
                                             tokens.end());

  ParsedTitle parsed;
  parsed.attack_type = std::string(attack);
  if (version_tokens > 0) parsed.version_expr = text::join(version_part, " ");

  if (!kw || *kw == ExploitCategory::Core) {
    // Core titles carry no product; without a keyword a version is mandatory.
    if (!product_tokens.empty()) return uncategorized;
    if (!kw && version_tokens == 0) return uncategorized;
    parsed.category = ExploitCategory::Core;
    return parsed;
  }

  if (product_tokens.empty()) return uncategorized;
  parsed.category = *kw;
  parsed.product = text::join(product_tokens, " ");
  return parsed;
}

std::string render_title(const ParsedTitle& parsed) {
  std::string out = "WordPress";
  if (parsed.category == ExploitCategory::Uncategorized) return out;
  out += ' ';
  out += to_string(parsed.category);
  if (parsed.product) out += ' ' + *parsed.product;
  if (parsed.version_expr) out += ' ' + *parsed.version_expr;
  out += kSeparator;
  out += parsed.attack_type;
  return out;
}

CategoryCounts classify_corpus(const Corpus& corpus) {
  CategoryCounts counts{{ExploitCategory::Core, 0},
                        {ExploitCategory::Plugin, 0},
                        {ExploitCategory::Theme, 0},
                        {ExploitCategory::Uncategorized, 0}};
  for (const auto& [id, record] : corpus.records) {
    if (!text::istarts_with(text::trim(record.title), "wordpress")) continue;
    ++counts[parse_title(record.title).category];
  }
  return counts;
}

}  // namespace wpenv
