#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace wpenv {

using Date = std::chrono::year_month_day;
using EdbId = std::int64_t;
using PocHeader = std::map<std::string, std::string>;

/// One exploit database entry: title, metadata and the PoC section.
struct ExploitRecord {
  EdbId edb_id = 0;
  std::string title;
  std::string author;
  std::string vuln_type;
  Date published{};
  std::string platform;
  std::vector<std::string> cve_ids;
  std::string poc_text;
  PocHeader poc_header;
  std::optional<std::filesystem::path> app_archive;

  friend bool operator==(const ExploitRecord&, const ExploitRecord&) = default;
};

struct Corpus {
  std::map<EdbId, ExploitRecord> records;
  std::filesystem::path source_path;
  Date snapshot_date{};
  /// Load-time warnings (missing PoC files and similar). Not part of equality.
  std::vector<std::string> warnings;

  const ExploitRecord* find(EdbId id) const;
  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.records == b.records && a.source_path == b.source_path && a.snapshot_date == b.snapshot_date;
  }
};

struct LoadOptions {
  std::optional<std::string> platform;
  std::optional<std::string> vuln_type;
  /// Directory holding `<edb_id>.zip` archives; defaults to `<files_root>/apps`.
  std::optional<std::filesystem::path> apps_dir;
  /// Defaults to the newest published date in the index.
  std::optional<Date> snapshot_date;
};

/// Loads a `files_exploits.csv`-style index. Throws Error(IndexUnreadable) or
/// Error(DuplicateId). Missing PoC files become empty poc_text plus a warning;
/// rows dated before 1999-01-01 are skipped with a warning.
Corpus load_corpus(const std::filesystem::path& index_path, const std::filesystem::path& files_root,
                   const LoadOptions& options = {});

/// Convenience layout: `<dir>/files_exploits.csv`, PoC paths relative to `<dir>`,
/// archives under `<dir>/apps`.
Corpus load_corpus_dir(const std::filesystem::path& dir, const LoadOptions& options = {});

/// Records whose title starts with "WordPress" (case-insensitive).
Corpus select_wordpress(const Corpus& corpus);

/// Header lines (`# Key: value` or `Key: value`) from the first 60 lines.
/// Known keys are normalized to software-link, version, tested-on,
/// exploit-author, cve; other keys are kept lower-cased and trimmed.
PocHeader parse_poc_header(std::string_view poc_text);
std::string render_poc_header(const PocHeader& header);

inline constexpr std::size_t kHeaderScanLines = 60;

std::optional<Date> parse_date(std::string_view iso);
std::string format_date(const Date& date);

nlohmann::json corpus_to_json(const Corpus& corpus);
Corpus corpus_from_json(const nlohmann::json& doc);
nlohmann::json record_to_json(const ExploitRecord& record);
ExploitRecord record_from_json(const nlohmann::json& doc);

}  // namespace wpenv
