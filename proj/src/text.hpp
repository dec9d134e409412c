#pragma once

// Small string helpers shared by the parsers.

#include <string>
#include <string_view>
#include <vector>

namespace wpenv::text {

std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b) noexcept;
bool istarts_with(std::string_view s, std::string_view prefix) noexcept;
bool iends_with(std::string_view s, std::string_view suffix) noexcept;
std::vector<std::string_view> split(std::string_view s, char sep);
std::vector<std::string_view> split_whitespace(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view s);
/// Trims and collapses every whitespace run to one space.
std::string collapse_whitespace(std::string_view s);
std::string join(const std::vector<std::string_view>& parts, std::string_view sep);
/// Replaces ill-formed UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);
/// Quotes an argument for POSIX sh when it contains anything but [A-Za-z0-9_./:=@%+,-].
std::string shell_quote(std::string_view arg);

}  // namespace wpenv::text
