#include "wpenv/version.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <limits>

#include "text.hpp"
#include "wpenv/error.hpp"

namespace wpenv {

namespace {

constexpr std::array<std::string_view, 9> kPreReleaseMarkers = {
    "alpha", "beta", "dev", "pre", "rc", "pl", "a", "b", "p"};

// Parses the numeric head; returns the number of characters consumed or 0.
std::size_t parse_segments(std::string_view text, std::vector<std::uint64_t>& out) {
  std::size_t i = 0;
  while (true) {
    std::size_t start = i;
    std::uint64_t value = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      auto digit = static_cast<std::uint64_t>(text[i] - '0');
      if (value > (std::numeric_limits<std::uint64_t>::max() - digit) / 10) return 0;
      value = value * 10 + digit;
      ++i;
    }
    if (i == start) return 0;
    out.push_back(value);
    if (i + 1 < text.size() && text[i] == '.' && std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
      ++i;
      continue;
    }
    return i;
  }
}

bool is_pre_release_suffix(std::string_view suffix) {
  if (!suffix.empty() && (suffix.front() == '-' || suffix.front() == '_' || suffix.front() == '.')) {
    suffix.remove_prefix(1);
  }
  std::string lowered = text::to_lower(suffix);
  for (auto marker : kPreReleaseMarkers) {
    if (!std::string_view(lowered).starts_with(marker)) continue;
    std::string_view rest = std::string_view(lowered).substr(marker.size());
    if (!rest.empty() && rest.front() == '.') rest.remove_prefix(1);
    if (std::all_of(rest.begin(), rest.end(), [](unsigned char c) { return std::isdigit(c); })) {
      return true;
    }
  }
  return false;
}

std::optional<Version> parse_impl(std::string_view text, bool lenient) {
  std::string_view raw = text::trim(text);
  std::string_view body = raw;
  if (lenient && !body.empty() && (body.front() == 'v' || body.front() == 'V')) body.remove_prefix(1);
  std::vector<std::uint64_t> segments;
  std::size_t used = parse_segments(body, segments);
  if (used == 0) return std::nullopt;
  std::string_view suffix = body.substr(used);
  if (!suffix.empty()) {
    if (!lenient || !is_pre_release_suffix(suffix)) return std::nullopt;
  }
  return Version(std::move(segments), std::string(raw), std::string(suffix));
}

}  // namespace

Version::Version(std::vector<std::uint64_t> segments, std::string raw, std::string suffix)
    : segments_(std::move(segments)), raw_(std::move(raw)), suffix_(std::move(suffix)) {
  if (segments_.empty()) throw Error(ErrorCode::InvalidArgument, "version needs at least one segment");
  if (raw_.empty()) raw_ = str();
}

std::string Version::str() const {
  std::string out;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(segments_[i]);
  }
  return out;
}

std::strong_ordering operator<=>(const Version& a, const Version& b) noexcept {
  const auto& x = a.segments_;
  const auto& y = b.segments_;
  std::size_t n = std::max(x.size(), y.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t l = i < x.size() ? x[i] : 0;
    std::uint64_t r = i < y.size() ? y[i] : 0;
    if (l != r) return l <=> r;
  }
  return std::strong_ordering::equal;
}

std::optional<Version> try_parse_version(std::string_view text) { return parse_impl(text, true); }

std::optional<Version> try_parse_numeric_version(std::string_view text) { return parse_impl(text, false); }

Version parse_version(std::string_view text) {
  if (auto v = try_parse_version(text)) return *v;
  throw Error(ErrorCode::UnparsableVersion, "not a version: '" + std::string(text) + "'");
}

VersionConstraint VersionConstraint::exact(Version v) { return {Kind::Exact, {std::move(v)}}; }
VersionConstraint VersionConstraint::below(Version v) { return {Kind::UpperBoundExclusive, {std::move(v)}}; }
VersionConstraint VersionConstraint::at_most(Version v) { return {Kind::UpperBoundInclusive, {std::move(v)}}; }

VersionConstraint VersionConstraint::one_of(std::vector<Version> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "version set must not be empty");
  return {Kind::Set, std::move(values)};
}

bool VersionConstraint::satisfied_by(const Version& v) const noexcept {
  switch (kind_) {
    case Kind::Exact: return v == values_.front();
    case Kind::UpperBoundExclusive: return v < values_.front();
    case Kind::UpperBoundInclusive: return v <= values_.front();
    case Kind::Set:
      return std::any_of(values_.begin(), values_.end(), [&](const Version& m) { return m == v; });
  }
  return false;
}

std::string VersionConstraint::render() const {
  switch (kind_) {
    case Kind::Exact: return values_.front().str();
    case Kind::UpperBoundExclusive: return "< " + values_.front().str();
    case Kind::UpperBoundInclusive: return "<= " + values_.front().str();
    case Kind::Set: {
      std::string out;
      for (std::size_t i = 0; i < values_.size(); ++i) {
        if (i) out += '/';
        out += values_[i].str();
      }
      return out;
    }
  }
  return {};
}

std::string_view to_string(VersionConstraint::Kind kind) noexcept {
  switch (kind) {
    case VersionConstraint::Kind::Exact: return "Exact";
    case VersionConstraint::Kind::UpperBoundExclusive: return "UpperBoundExclusive";
    case VersionConstraint::Kind::UpperBoundInclusive: return "UpperBoundInclusive";
    case VersionConstraint::Kind::Set: return "Set";
  }
  return "Unknown";
}

std::optional<VersionConstraint> try_parse_version_expr(std::string_view expr) {
  std::string_view s = text::trim(expr);
  if (s.starts_with("<=")) {
    auto v = try_parse_version(s.substr(2));
    if (!v) return std::nullopt;
    return VersionConstraint::at_most(std::move(*v));
  }
  if (s.starts_with("<")) {
    auto v = try_parse_version(s.substr(1));
    if (!v) return std::nullopt;
    return VersionConstraint::below(std::move(*v));
  }
  std::vector<Version> members;
  for (std::string_view part : text::split(s, '/')) {
    auto v = try_parse_version(part);
    if (!v) return std::nullopt;
    members.push_back(std::move(*v));
  }
  if (members.empty()) return std::nullopt;
  if (members.size() == 1) return VersionConstraint::exact(std::move(members.front()));
  return VersionConstraint::one_of(std::move(members));
}

VersionConstraint parse_version_expr(std::string_view expr) {
  if (auto c = try_parse_version_expr(expr)) return *c;
  throw Error(ErrorCode::UnparsableVersion, "not a version expression: '" + std::string(expr) + "'");
}

}  // namespace wpenv
