#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wpenv/corpus.hpp"
#include "wpenv/version.hpp"

namespace wpenv {

struct CpeEntry {
  std::string vendor;
  std::string product;
  Version version;
  std::string raw_cpe;
};

/// Splits a CPE 2.3 formatted string into its 13 components, honouring
/// backslash escapes. Returns nullopt unless it starts with `cpe:2.3:`.
std::optional<std::vector<std::string>> split_cpe23(std::string_view cpe);

/// CVE -> CPE 2.3 strings. Implementations must tolerate concurrent calls.
class CpeDictionary {
 public:
  virtual ~CpeDictionary() = default;
  /// Throws Error(UnknownCve) or Error(DictionaryUnavailable).
  virtual std::vector<std::string> lookup(std::string_view cve) const = 0;
};

/// Backed by a JSON object mapping CVE id to a list of CPE strings.
class FixtureCpeDictionary final : public CpeDictionary {
 public:
  explicit FixtureCpeDictionary(std::map<std::string, std::vector<std::string>> entries);
  /// Throws Error(MalformedDocument) when the file is missing or malformed.
  static FixtureCpeDictionary from_file(const std::filesystem::path& path);

  std::vector<std::string> lookup(std::string_view cve) const override;

 private:
  std::map<std::string, std::vector<std::string>> entries_;
};

/// Queries the NVD CVE API (`/rest/json/cves/2.0?cveId=...`) and collects the
/// `criteria` CPE strings from every configuration node. Stateless per call.
class NvdCpeDictionary final : public CpeDictionary {
 public:
  explicit NvdCpeDictionary(std::string base_url = "https://services.nvd.nist.gov",
                            std::optional<std::string> api_key = std::nullopt);

  std::vector<std::string> lookup(std::string_view cve) const override;

  /// Extracts CPE criteria from an NVD 2.0 response body.
  static std::vector<std::string> parse_response(std::string_view body);

 private:
  std::string base_url_;
  std::optional<std::string> api_key_;
};

/// Entries for `cve` whose version component is concrete dotted-numeric.
/// Wildcard (`*`) and not-applicable (`-`) versions are dropped.
std::vector<CpeEntry> resolve_versions_from_cve(std::string_view cve, const CpeDictionary& dict);

/// Version constraint from the PoC: the header "version" value when it
/// parses, else the first `version[: ]<expr>` match in the first 60 lines.
std::optional<VersionConstraint> extract_version_from_poc(const ExploitRecord& record);

}  // namespace wpenv
