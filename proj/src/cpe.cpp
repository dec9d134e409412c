#include "wpenv/cpe.hpp"

#include <cctype>
#include <fstream>

#include "json.hpp"
#include "net.hpp"
#include "text.hpp"
#include "wpenv/error.hpp"

namespace wpenv {

std::optional<std::vector<std::string>> split_cpe23(std::string_view cpe) {
  if (!cpe.starts_with("cpe:2.3:")) return std::nullopt;
  std::vector<std::string> parts(1);
  for (std::size_t i = 0; i < cpe.size(); ++i) {
    char c = cpe[i];
    if (c == '\\' && i + 1 < cpe.size()) {
      parts.back() += cpe[++i];
    } else if (c == ':') {
      parts.emplace_back();
    } else {
      parts.back() += c;
    }
  }
  if (parts.size() != 13) return std::nullopt;
  return parts;
}

FixtureCpeDictionary::FixtureCpeDictionary(std::map<std::string, std::vector<std::string>> entries)
    : entries_(std::move(entries)) {}

FixtureCpeDictionary FixtureCpeDictionary::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedDocument, "cannot read CPE fixture " + path.string());
  try {
    auto doc = nlohmann::json::parse(in);
    return FixtureCpeDictionary(doc.get<std::map<std::string, std::vector<std::string>>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, path.string() + ": " + e.what());
  }
}

std::vector<std::string> FixtureCpeDictionary::lookup(std::string_view cve) const {
  auto it = entries_.find(std::string(cve));
  if (it == entries_.end()) throw Error(ErrorCode::UnknownCve, std::string(cve));
  return it->second;
}

NvdCpeDictionary::NvdCpeDictionary(std::string base_url, std::optional<std::string> api_key)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)) {}

std::vector<std::string> NvdCpeDictionary::parse_response(std::string_view body) {
  std::vector<std::string> out;
  auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::DictionaryUnavailable, "NVD response is not JSON");
  }
  for (const auto& vuln : doc.value("vulnerabilities", nlohmann::json::array())) {
    const auto& cve = vuln.value("cve", nlohmann::json::object());
    for (const auto& config : cve.value("configurations", nlohmann::json::array())) {
      for (const auto& node : config.value("nodes", nlohmann::json::array())) {
        for (const auto& match : node.value("cpeMatch", nlohmann::json::array())) {
          if (match.contains("criteria") && match["criteria"].is_string()) {
            out.push_back(match["criteria"].get<std::string>());
          }
        }
      }
    }
  }
  return out;
}

std::vector<std::string> NvdCpeDictionary::lookup(std::string_view cve) const {
  net::GetOptions options;
  if (api_key_) options.headers.emplace_back("apiKey", *api_key_);
  auto response = net::get(base_url_ + "/rest/json/cves/2.0?cveId=" + net::url_encode(cve), options);
  if (!response) throw Error(ErrorCode::DictionaryUnavailable, "no response for " + std::string(cve));
  if (response->status == 404) throw Error(ErrorCode::UnknownCve, std::string(cve));
  if (response->status != 200) {
    throw Error(ErrorCode::DictionaryUnavailable, "HTTP " + std::to_string(response->status));
  }
  auto doc = nlohmann::json::parse(response->body, nullptr, false);
  if (!doc.is_discarded() && doc.value("totalResults", 0) == 0) throw Error(ErrorCode::UnknownCve, std::string(cve));
  return parse_response(response->body);
}

std::vector<CpeEntry> resolve_versions_from_cve(std::string_view cve, const CpeDictionary& dict) {
  std::vector<CpeEntry> entries;
  for (const std::string& raw : dict.lookup(cve)) {
    auto parts = split_cpe23(raw);
    if (!parts) continue;
    auto version = try_parse_numeric_version((*parts)[5]);
    if (!version) continue;
    entries.push_back(CpeEntry{(*parts)[3], (*parts)[4], std::move(*version), raw});
  }
  return entries;
}

std::optional<VersionConstraint> extract_version_from_poc(const ExploitRecord& record) {
  if (auto it = record.poc_header.find("version"); it != record.poc_header.end()) {
    if (auto c = try_parse_version_expr(it->second)) return c;
  }

  auto lines = text::split_lines(record.poc_text);
  if (lines.size() > kHeaderScanLines) lines.resize(kHeaderScanLines);
  for (std::string_view line : lines) {
    std::string lowered = text::to_lower(line);
    // "Tested on: WordPress version 5.0" names the test bed, not the target.
    if (parse_poc_header(line).contains("tested-on")) continue;
    std::size_t pos = 0;
    while ((pos = lowered.find("version", pos)) != std::string::npos) {
      std::size_t after = pos + 7;
      bool word_start = pos == 0 || !std::isalpha(static_cast<unsigned char>(lowered[pos - 1]));
      pos = after;
      if (!word_start || after >= lowered.size() || (lowered[after] != ':' && lowered[after] != ' ')) continue;
      auto tokens = text::split_whitespace(line.substr(after + 1));
      for (std::size_t k = tokens.size(); k > 0; --k) {
        std::vector<std::string_view> head(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(k));
        if (auto c = try_parse_version_expr(text::join(head, " "))) return c;
      }
    }
  }
  return std::nullopt;
}

}  // namespace wpenv
