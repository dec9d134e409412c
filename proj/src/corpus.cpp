#include "wpenv/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "text.hpp"
#include "wpenv/error.hpp"

namespace wpenv {

namespace fs = std::filesystem;

namespace {

constexpr Date kEarliestPublished{std::chrono::year{1999}, std::chrono::January, std::chrono::day{1}};

std::optional<std::string> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return buffer.str();
}

[[noreturn]] void unreadable(const fs::path& index, const std::string& why) {
  throw Error(ErrorCode::IndexUnreadable, index.string() + ": " + why);
}

bool valid_key(std::string_view key) {
  if (key.empty() || key.size() > 40 || !std::isalpha(static_cast<unsigned char>(key.front()))) return false;
  return std::all_of(key.begin(), key.end(), [](unsigned char c) {
    return std::isalnum(c) || c == ' ' || c == '-' || c == '_' || c == '/' || c == '(' || c == ')';
  });
}

std::string normalize_key(std::string_view key) {
  std::string lowered = text::to_lower(text::trim(key));
  std::string spaced = lowered;
  std::replace_if(spaced.begin(), spaced.end(), [](char c) { return c == '-' || c == '_'; }, ' ');
  spaced = text::collapse_whitespace(spaced);
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 5> kKnown = {{
      {"software link", "software-link"},
      {"version", "version"},
      {"tested on", "tested-on"},
      {"exploit author", "exploit-author"},
      {"cve", "cve"},
  }};
  for (const auto& [name, canonical] : kKnown) {
    if (spaced == name) return std::string(canonical);
  }
  return lowered;
}

std::vector<std::string> parse_cve_codes(std::string_view codes) {
  std::vector<std::string> out;
  for (std::string_view code : text::split(codes, ';')) {
    code = text::trim(code);
    if (text::istarts_with(code, "CVE-")) {
      std::string upper(code);
      std::transform(upper.begin(), upper.end(), upper.begin(),
                     [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
      if (std::find(out.begin(), out.end(), upper) == out.end()) out.push_back(std::move(upper));
    }
  }
  return out;
}

std::optional<std::size_t> column(const csv::Row& header, std::initializer_list<std::string_view> names) {
  for (std::string_view name : names) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (text::iequals(text::trim(header[i]), name)) return i;
    }
  }
  return std::nullopt;
}

}  // namespace

const ExploitRecord* Corpus::find(EdbId id) const {
  auto it = records.find(id);
  return it == records.end() ? nullptr : &it->second;
}

std::optional<Date> parse_date(std::string_view iso) {
  iso = text::trim(iso);
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  auto num = [&](std::size_t pos, std::size_t len, auto& out) {
    auto [ptr, ec] = std::from_chars(iso.data() + pos, iso.data() + pos + len, out);
    return ec == std::errc{} && ptr == iso.data() + pos + len;
  };
  if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return std::nullopt;
  Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

PocHeader parse_poc_header(std::string_view poc_text) {
  PocHeader header;
  auto lines = text::split_lines(poc_text);
  if (lines.size() > kHeaderScanLines) lines.resize(kHeaderScanLines);
  for (std::string_view line : lines) {
    line = text::trim(line);
    if (line.starts_with('#')) {
      while (line.starts_with('#')) line.remove_prefix(1);
      line = text::trim(line);
    }
    std::size_t colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    if (colon + 1 < line.size() && !std::isspace(static_cast<unsigned char>(line[colon + 1]))) continue;
    std::string_view key = text::trim(line.substr(0, colon));
    std::string_view value = text::trim(line.substr(colon + 1));
    if (!valid_key(key) || value.empty()) continue;
    header.emplace(normalize_key(key), std::string(value));
  }
  return header;
}

std::string render_poc_header(const PocHeader& header) {
  std::string out;
  for (const auto& [key, value] : header) {
    out += "# " + key + ": " + value + "\n";
  }
  return out;
}

Corpus load_corpus(const fs::path& index_path, const fs::path& files_root, const LoadOptions& options) {
  auto content = read_file(index_path);
  if (!content) unreadable(index_path, "cannot read index file");
  std::string_view body = *content;
  if (body.starts_with("\xEF\xBB\xBF")) body.remove_prefix(3);

  std::string csv_error;
  auto table = csv::parse(body, &csv_error);
  if (!table) unreadable(index_path, csv_error);

  const auto& header = table->header;
  auto col_id = column(header, {"id"});
  auto col_file = column(header, {"file"});
  auto col_title = column(header, {"description", "title"});
  auto col_date = column(header, {"date", "date_published"});
  auto col_author = column(header, {"author"});
  auto col_type = column(header, {"type"});
  auto col_platform = column(header, {"platform"});
  auto col_codes = column(header, {"codes"});
  if (!col_id || !col_file || !col_title || !col_date || !col_author || !col_type || !col_platform) {
    unreadable(index_path, "header lacks one of id, file, description, date, author, type, platform");
  }

  fs::path apps_dir = options.apps_dir.value_or(files_root / "apps");
  Corpus corpus;
  corpus.source_path = index_path;
  std::set<EdbId> seen;
  std::optional<Date> newest;

  for (std::size_t r = 0; r < table->rows.size(); ++r) {
    const auto& row = table->rows[r];
    std::string where = "row at line " + std::to_string(table->row_lines[r]);
    if (row.size() != header.size()) {
      unreadable(index_path, where + " has " + std::to_string(row.size()) + " fields, expected " +
                                 std::to_string(header.size()));
    }

    std::string_view id_text = text::trim(row[*col_id]);
    EdbId id = 0;
    auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
    if (ec != std::errc{} || ptr != id_text.data() + id_text.size() || id <= 0) {
      unreadable(index_path, where + ": id '" + std::string(id_text) + "' is not a positive integer");
    }
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::DuplicateId, index_path.string() + ": id " + std::to_string(id) + " appears twice");
    }

    auto published = parse_date(row[*col_date]);
    if (!published) unreadable(index_path, where + ": invalid published date '" + row[*col_date] + "'");
    if (*published < kEarliestPublished) {
      corpus.warnings.push_back("EDB-" + std::to_string(id) + ": published " + format_date(*published) +
                                " predates 1999-01-01, skipped");
      continue;
    }

    ExploitRecord record;
    record.edb_id = id;
    record.title = std::string(text::trim(row[*col_title]));
    record.author = std::string(text::trim(row[*col_author]));
    record.vuln_type = std::string(text::trim(row[*col_type]));
    record.platform = std::string(text::trim(row[*col_platform]));
    record.published = *published;
    if (col_codes) record.cve_ids = parse_cve_codes(row[*col_codes]);

    if (options.platform && !text::iequals(record.platform, *options.platform)) continue;
    if (options.vuln_type && !text::iequals(record.vuln_type, *options.vuln_type)) continue;

    std::string_view rel = text::trim(row[*col_file]);
    fs::path poc_path = files_root / fs::path(std::string(rel));
    if (auto poc = rel.empty() ? std::nullopt : read_file(poc_path)) {
      record.poc_text = text::sanitize_utf8(*poc);
    } else {
      corpus.warnings.push_back("EDB-" + std::to_string(id) + ": PoC file not found: " + poc_path.string());
    }
    record.poc_header = parse_poc_header(record.poc_text);

    fs::path archive = apps_dir / (std::to_string(id) + ".zip");
    std::error_code fs_ec;
    if (fs::is_regular_file(archive, fs_ec)) record.app_archive = archive;

    if (!newest || record.published > *newest) newest = record.published;
    corpus.records.emplace(id, std::move(record));
  }

  corpus.snapshot_date = options.snapshot_date.value_or(newest.value_or(kEarliestPublished));
  return corpus;
}

Corpus load_corpus_dir(const fs::path& dir, const LoadOptions& options) {
  return load_corpus(dir / "files_exploits.csv", dir, options);
}

Corpus select_wordpress(const Corpus& corpus) {
  Corpus out;
  out.source_path = corpus.source_path;
  out.snapshot_date = corpus.snapshot_date;
  out.warnings = corpus.warnings;
  for (const auto& [id, record] : corpus.records) {
    if (text::istarts_with(text::trim(record.title), "wordpress")) out.records.emplace(id, record);
  }
  return out;
}

nlohmann::json record_to_json(const ExploitRecord& record) {
  nlohmann::json doc;
  doc["edb_id"] = record.edb_id;
  doc["title"] = record.title;
  doc["author"] = record.author;
  doc["type"] = record.vuln_type;
  doc["published"] = format_date(record.published);
  doc["platform"] = record.platform;
  doc["cve_ids"] = record.cve_ids;
  doc["poc_text"] = record.poc_text;
  doc["poc_header"] = record.poc_header;
  doc["app_archive"] = record.app_archive ? nlohmann::json(record.app_archive->string()) : nlohmann::json(nullptr);
  return doc;
}

ExploitRecord record_from_json(const nlohmann::json& doc) {
  try {
    ExploitRecord record;
    record.edb_id = doc.at("edb_id").get<EdbId>();
    record.title = doc.at("title").get<std::string>();
    record.author = doc.at("author").get<std::string>();
    record.vuln_type = doc.at("type").get<std::string>();
    auto published = parse_date(doc.at("published").get<std::string>());
    if (!published) throw Error(ErrorCode::MalformedDocument, "bad published date");
    record.published = *published;
    record.platform = doc.at("platform").get<std::string>();
    record.cve_ids = doc.at("cve_ids").get<std::vector<std::string>>();
    record.poc_text = doc.at("poc_text").get<std::string>();
    record.poc_header = doc.at("poc_header").get<PocHeader>();
    if (!doc.at("app_archive").is_null()) record.app_archive = doc.at("app_archive").get<std::string>();
    return record;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("record: ") + e.what());
  }
}

nlohmann::json corpus_to_json(const Corpus& corpus) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& [id, record] : corpus.records) records.push_back(record_to_json(record));
  return {{"source_path", corpus.source_path.string()},
          {"snapshot_date", format_date(corpus.snapshot_date)},
          {"records", std::move(records)}};
}

Corpus corpus_from_json(const nlohmann::json& doc) {
  try {
    Corpus corpus;
    corpus.source_path = doc.at("source_path").get<std::string>();
    auto snapshot = parse_date(doc.at("snapshot_date").get<std::string>());
    if (!snapshot) throw Error(ErrorCode::MalformedDocument, "bad snapshot date");
    corpus.snapshot_date = *snapshot;
    for (const auto& item : doc.at("records")) {
      ExploitRecord record = record_from_json(item);
      EdbId id = record.edb_id;
      if (!corpus.records.emplace(id, std::move(record)).second) {
        throw Error(ErrorCode::DuplicateId, "id " + std::to_string(id) + " appears twice");
      }
    }
    return corpus;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("corpus: ") + e.what());
  }
}

}  // namespace wpenv
