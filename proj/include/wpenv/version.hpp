#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wpenv {

/// Dotted-numeric version. Missing trailing segments compare as zero, so
/// "4.7" == "4.7.0" and "4.10" > "4.9". A pre-release suffix ("beta", "rc1")
/// is accepted on parse but only kept in suffix() for diagnostics.
class Version {
 public:
  explicit Version(std::vector<std::uint64_t> segments, std::string raw = {}, std::string suffix = {});

  const std::vector<std::uint64_t>& segments() const noexcept { return segments_; }
  const std::string& raw() const noexcept { return raw_; }
  const std::string& suffix() const noexcept { return suffix_; }

  /// Canonical dotted form of the numeric segments.
  std::string str() const;

  friend std::strong_ordering operator<=>(const Version& a, const Version& b) noexcept;
  friend bool operator==(const Version& a, const Version& b) noexcept {
    return (a <=> b) == std::strong_ordering::equal;
  }

 private:
  std::vector<std::uint64_t> segments_;
  std::string raw_;
  std::string suffix_;
};

/// Lenient parse: optional leading 'v', pre-release suffix stripped.
std::optional<Version> try_parse_version(std::string_view text);
/// Strict parse: digits and dots only.
std::optional<Version> try_parse_numeric_version(std::string_view text);
/// Throws Error(UnparsableVersion).
Version parse_version(std::string_view text);

class VersionConstraint {
 public:
  enum class Kind { Exact, UpperBoundExclusive, UpperBoundInclusive, Set };

  static VersionConstraint exact(Version v);
  static VersionConstraint below(Version v);
  static VersionConstraint at_most(Version v);
  /// Throws Error(InvalidArgument) on an empty list.
  static VersionConstraint one_of(std::vector<Version> values);

  Kind kind() const noexcept { return kind_; }
  std::span<const Version> values() const noexcept { return values_; }
  /// The single operand of Exact and the bound kinds; first member of a Set.
  const Version& front() const noexcept { return values_.front(); }

  bool satisfied_by(const Version& v) const noexcept;

  /// Text accepted by parse_version_expr, e.g. "< 4.7.1" or "4.7.0/4.7.1".
  std::string render() const;

  friend bool operator==(const VersionConstraint&, const VersionConstraint&) = default;

 private:
  VersionConstraint(Kind kind, std::vector<Version> values) : kind_(kind), values_(std::move(values)) {}

  Kind kind_;
  std::vector<Version> values_;
};

std::string_view to_string(VersionConstraint::Kind kind) noexcept;

/// Grammar: `<` v | `<=` v | v (`/` v)*, whitespace tolerated.
/// Throws Error(UnparsableVersion).
VersionConstraint parse_version_expr(std::string_view expr);
std::optional<VersionConstraint> try_parse_version_expr(std::string_view expr);

}  // namespace wpenv
