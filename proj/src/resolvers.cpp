#include "wpenv/resolvers.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>

#include "json.hpp"
#include "net.hpp"
#include "text.hpp"
#include "wpenv/error.hpp"
#include "wpenv/zip.hpp"

namespace wpenv {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Base image
// ---------------------------------------------------------------------------

const Version& minimum_image_version() {
  static const Version floor({3, 1, 0});
  return floor;
}

FixtureRegistry::FixtureRegistry(std::string repository, std::vector<std::string> tags)
    : repository_(std::move(repository)), tags_(std::move(tags)) {}

FixtureRegistry FixtureRegistry::from_file(const fs::path& path, std::string repository) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedDocument, "cannot read tag index " + path.string());
  try {
    return FixtureRegistry(std::move(repository), nlohmann::json::parse(in).get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, path.string() + ": " + e.what());
  }
}

DockerHubRegistry::DockerHubRegistry(std::string repository, std::string base_url)
    : repository_(std::move(repository)), base_url_(std::move(base_url)) {}

std::vector<std::string> DockerHubRegistry::list_tags() const {
  std::vector<std::string> tags;
  std::string url = base_url_ + "/v2/repositories/library/" + repository_ + "/tags?page_size=100";
  for (int page = 0; page < 200 && !url.empty(); ++page) {
    auto response = net::get(url);
    if (!response || response->status != 200) {
      throw Error(ErrorCode::RegistryUnavailable,
                  response ? "HTTP " + std::to_string(response->status) : "no response from " + url);
    }
    auto doc = nlohmann::json::parse(response->body, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::RegistryUnavailable, "tag listing is not JSON");
    for (const auto& item : doc.value("results", nlohmann::json::array())) {
      if (item.contains("name") && item["name"].is_string()) tags.push_back(item["name"].get<std::string>());
    }
    url = doc.contains("next") && doc["next"].is_string() ? doc["next"].get<std::string>() : std::string();
  }
  return tags;
}

std::optional<std::pair<std::string, Version>> highest_satisfying(const std::vector<std::string>& tags,
                                                                  const VersionConstraint* constraint,
                                                                  const std::optional<Version>& floor) {
  std::optional<std::pair<std::string, Version>> best;
  for (const auto& tag : tags) {
    auto v = try_parse_numeric_version(tag);
    if (!v) continue;
    if (floor && *v < *floor) continue;
    if (constraint && !constraint->satisfied_by(*v)) continue;
    if (best) {
      auto order = *v <=> best->second;
      if (order < 0) continue;
      // Equal versions ("4.7" vs "4.7.0"): prefer the more specific tag, then the
      // lexicographically smaller, so the result does not depend on list order.
      if (order == 0) {
        auto a = v->segments().size();
        auto b = best->second.segments().size();
        if (a < b || (a == b && tag >= best->first)) continue;
      }
    }
    best = std::make_pair(tag, std::move(*v));
  }
  return best;
}

ImageRef find_core_image(const VersionConstraint& constraint, const RegistryClient& registry) {
  auto best = highest_satisfying(registry.list_tags(), &constraint, minimum_image_version());
  if (!best) {
    throw Error(ErrorCode::NoImage, "no " + registry.repository() + " tag satisfies '" + constraint.render() +
                                        "' at or above " + minimum_image_version().str());
  }
  return ImageRef{registry.repository(), best->first, best->second};
}

ImageRef find_latest_image(const RegistryClient& registry) {
  auto best = highest_satisfying(registry.list_tags(), nullptr, minimum_image_version());
  if (!best) throw Error(ErrorCode::NoImage, "no numeric " + registry.repository() + " tag available");
  return ImageRef{registry.repository(), best->first, best->second};
}

// ---------------------------------------------------------------------------
// Names
// ---------------------------------------------------------------------------

std::string_view to_string(ComponentKind kind) noexcept {
  return kind == ComponentKind::Plugin ? "Plugin" : "Theme";
}

std::string_view to_string(SourceKind kind) noexcept {
  switch (kind) {
    case SourceKind::SvnRepo: return "SvnRepo";
    case SourceKind::SoftwareLink: return "SoftwareLink";
    case SourceKind::ExploitDbApp: return "ExploitDbApp";
  }
  return "SvnRepo";
}

std::optional<ComponentKind> component_kind_from_string(std::string_view name) noexcept {
  if (text::iequals(name, "plugin")) return ComponentKind::Plugin;
  if (text::iequals(name, "theme")) return ComponentKind::Theme;
  return std::nullopt;
}

std::optional<SourceKind> source_kind_from_string(std::string_view name) noexcept {
  for (auto k : {SourceKind::SvnRepo, SourceKind::SoftwareLink, SourceKind::ExploitDbApp}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

std::string derive_slug(std::string_view product) {
  std::string slug;
  bool pending_hyphen = false;
  for (unsigned char c : product) {
    if (std::isalnum(c)) {
      if (pending_hyphen && !slug.empty()) slug += '-';
      pending_hyphen = false;
      slug += static_cast<char>(std::tolower(c));
    } else {
      pending_hyphen = true;
    }
  }
  if (slug.empty()) throw Error(ErrorCode::EmptySlug, "product '" + std::string(product) + "' has no usable characters");
  return slug;
}

// ---------------------------------------------------------------------------
// SVN
// ---------------------------------------------------------------------------

namespace {

bool safe_name(std::string_view name) {
  return !name.empty() && name != "." && name != ".." && name.find('/') == std::string_view::npos &&
         name.find('\\') == std::string_view::npos;
}

bool non_empty_dir(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return false;
  for (const auto& entry : fs::recursive_directory_iterator(dir, ec)) {
    if (entry.is_regular_file()) return true;
  }
  return false;
}

std::string url_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
        std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
      out += static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16));
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

std::string subpath(const SvnLayout& layout, std::string_view tag) {
  if (tag.empty()) return layout.trunk_dir.value_or("");
  if (layout.tags_dir.empty()) return std::string(tag);
  return layout.tags_dir + "/" + std::string(tag);
}

}  // namespace

DirectorySvnClient::DirectorySvnClient(SvnLayout plugins, SvnLayout themes)
    : plugins_(std::move(plugins)), themes_(std::move(themes)) {}

fs::path DirectorySvnClient::dir(ComponentKind kind, std::string_view slug, std::string_view tag) const {
  return fs::path(layout(kind).root) / std::string(slug) / subpath(layout(kind), tag);
}

std::vector<std::string> DirectorySvnClient::list_tags(ComponentKind kind, std::string_view slug) const {
  std::vector<std::string> tags;
  if (!safe_name(slug)) return tags;
  const auto& l = layout(kind);
  fs::path base = fs::path(l.root) / std::string(slug);
  if (!l.tags_dir.empty()) base /= l.tags_dir;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(base, ec)) {
    std::string name = entry.path().filename().string();
    if (!entry.is_directory()) continue;
    if (l.tags_dir.empty() && l.trunk_dir && name == *l.trunk_dir) continue;
    tags.push_back(name);
  }
  std::sort(tags.begin(), tags.end());
  return tags;
}

bool DirectorySvnClient::checkout(ComponentKind kind, std::string_view slug, std::string_view tag,
                                  const fs::path& dest) const {
  if (!safe_name(slug) || (!tag.empty() && !safe_name(tag))) return false;
  if (tag.empty() && !layout(kind).trunk_dir) return false;
  fs::path source = dir(kind, slug, tag);
  if (!non_empty_dir(source)) return false;
  fs::create_directories(dest);
  fs::copy(source, dest, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  return true;
}

std::string DirectorySvnClient::locator(ComponentKind kind, std::string_view slug, std::string_view tag) const {
  return (dir(kind, slug, tag)).generic_string() + "/";
}

HttpSvnClient::HttpSvnClient(SvnLayout plugins, SvnLayout themes)
    : plugins_(std::move(plugins)), themes_(std::move(themes)) {}

HttpSvnClient HttpSvnClient::wordpress_org() {
  // The theme repository keeps versions directly under the slug, without trunk.
  return HttpSvnClient(SvnLayout{"https://plugins.svn.wordpress.org", "tags", "trunk"},
                       SvnLayout{"https://themes.svn.wordpress.org", "", std::nullopt});
}

std::vector<std::string> HttpSvnClient::parse_listing(std::string_view html) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  static constexpr std::string_view kHref = "href=\"";
  while ((pos = html.find(kHref, pos)) != std::string_view::npos) {
    pos += kHref.size();
    std::size_t end = html.find('"', pos);
    if (end == std::string_view::npos) break;
    std::string target(html.substr(pos, end - pos));
    pos = end + 1;
    if (target.empty() || target.starts_with("../") || target.starts_with("/") || target.starts_with("?") ||
        target.find("://") != std::string::npos || target.find("..") != std::string::npos) {
      continue;
    }
    out.push_back(std::move(target));
  }
  return out;
}

std::string HttpSvnClient::locator(ComponentKind kind, std::string_view slug, std::string_view tag) const {
  const auto& l = layout(kind);
  return l.root + "/" + net::url_encode(slug) + "/" + subpath(l, tag) + "/";
}

std::vector<std::string> HttpSvnClient::list_tags(ComponentKind kind, std::string_view slug) const {
  const auto& l = layout(kind);
  std::string url = l.root + "/" + net::url_encode(slug) + "/" + (l.tags_dir.empty() ? "" : l.tags_dir + "/");
  auto response = net::get(url);
  std::vector<std::string> tags;
  if (!response || response->status != 200) return tags;
  for (const auto& href : parse_listing(response->body)) {
    if (!href.ends_with('/')) continue;
    std::string name = url_decode(href.substr(0, href.size() - 1));
    if (l.tags_dir.empty() && l.trunk_dir && name == *l.trunk_dir) continue;
    if (safe_name(name)) tags.push_back(name);
  }
  std::sort(tags.begin(), tags.end());
  return tags;
}

bool HttpSvnClient::checkout(ComponentKind kind, std::string_view slug, std::string_view tag,
                             const fs::path& dest) const {
  if (!safe_name(slug) || (!tag.empty() && !safe_name(tag))) return false;
  if (tag.empty() && !layout(kind).trunk_dir) return false;

  constexpr std::size_t kMaxFiles = 20000;
  constexpr int kMaxDepth = 32;
  std::size_t files = 0;
  std::function<bool(const std::string&, const fs::path&, int)> walk = [&](const std::string& url,
                                                                          const fs::path& into, int depth) {
    if (depth > kMaxDepth) return false;
    auto listing = net::get(url);
    if (!listing || listing->status != 200) return false;
    fs::create_directories(into);
    for (const auto& href : parse_listing(listing->body)) {
      bool is_dir = href.ends_with('/');
      std::string name = url_decode(is_dir ? href.substr(0, href.size() - 1) : href);
      if (!safe_name(name)) continue;
      if (is_dir) {
        if (!walk(url + href, into / name, depth + 1)) return false;
        continue;
      }
      if (++files > kMaxFiles) return false;
      auto file = net::get(url + href);
      if (!file || file->status != 200) return false;
      std::ofstream out(into / name, std::ios::binary | std::ios::trunc);
      out.write(file->body.data(), static_cast<std::streamsize>(file->body.size()));
      if (!out) return false;
    }
    return true;
  };
  return walk(locator(kind, slug, tag), dest, 0) && files > 0;
}

// ---------------------------------------------------------------------------
// Software links
// ---------------------------------------------------------------------------

FixtureLinkClient::FixtureLinkClient(std::map<std::string, fs::path> files) : files_(std::move(files)) {}

FixtureLinkClient FixtureLinkClient::from_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedDocument, "cannot read link fixture " + path.string());
  try {
    std::map<std::string, fs::path> files;
    for (const auto& [url, rel] : nlohmann::json::parse(in).get<std::map<std::string, std::string>>()) {
      files.emplace(url, path.parent_path() / rel);
    }
    return FixtureLinkClient(std::move(files));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, path.string() + ": " + e.what());
  }
}

std::optional<std::string> FixtureLinkClient::download(std::string_view url) const {
  auto it = files_.find(std::string(url));
  if (it == files_.end()) return std::nullopt;
  std::ifstream in(it->second, std::ios::binary);
  if (!in) return std::nullopt;
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::optional<std::string> HttpLinkClient::download(std::string_view url) const {
  auto response = net::get(url);
  if (!response || response->status != 200) return std::nullopt;
  return std::move(response->body);
}

bool is_archive_link(std::string_view url) {
  std::string_view path = url.substr(0, url.find_first_of("?#"));
  return text::iends_with(path, ".zip") && net::split_url(url).has_value();
}

// ---------------------------------------------------------------------------
// Fetch
// ---------------------------------------------------------------------------

FetchedComponent fetch_component(ComponentKind kind, std::string_view slug, const std::optional<Version>& version,
                                 const ExploitRecord& record, const SourceClients& sources,
                                 const fs::path& work_dir, const FetchOptions& options) {
  if (slug.empty() || derive_slug(slug) != slug) {
    throw Error(ErrorCode::InvalidArgument, "'" + std::string(slug) + "' is not a slug");
  }
  const fs::path dest = work_dir / std::to_string(record.edb_id) / "components" / std::string(slug);
  auto reset = [&] {
    fs::remove_all(dest);
    fs::create_directories(dest);
  };
  std::vector<std::string> misses;
  auto found = [&](SourceKind source, std::string locator) {
    return FetchedComponent{kind, std::string(slug), version, ComponentSource{source, std::move(locator)}, dest};
  };

  // 1. Extension repository: the tag matching the version, or trunk.
  if (sources.svn) {
    std::optional<std::string> tag;
    if (version) {
      auto tags = sources.svn->list_tags(kind, slug);
      auto exact = std::find(tags.begin(), tags.end(), version->str());
      if (exact != tags.end()) {
        tag = *exact;
      } else {
        for (const auto& t : tags) {
          auto v = try_parse_version(t);
          if (v && *v == *version) {
            tag = t;
            break;
          }
        }
      }
      if (!tag) misses.push_back("svn: no tag " + version->str());
    } else if (options.allow_trunk) {
      tag = "";
    } else {
      misses.push_back("svn: no version to check out");
    }
    if (tag) {
      try {
        reset();
        if (sources.svn->checkout(kind, slug, *tag, dest) && non_empty_dir(dest)) {
          return found(SourceKind::SvnRepo, sources.svn->locator(kind, slug, *tag));
        }
        misses.push_back("svn: checkout failed");
      } catch (const std::exception& e) {
        misses.push_back(std::string("svn: ") + e.what());
      }
    }
  }

  // 2. Software link from the PoC header, archives only.
  if (sources.links) {
    auto it = record.poc_header.find("software-link");
    if (it == record.poc_header.end()) {
      misses.push_back("link: none in PoC header");
    } else if (!is_archive_link(it->second)) {
      misses.push_back("link: not an archive: " + it->second);
    } else if (auto bytes = sources.links->download(it->second)) {
      try {
        reset();
        if (extract_zip(*bytes, dest) > 0) return found(SourceKind::SoftwareLink, it->second);
        misses.push_back("link: empty archive");
      } catch (const std::exception& e) {
        misses.push_back(std::string("link: ") + e.what());
      }
    } else {
      misses.push_back("link: download failed");
    }
  }

  // 3. Vulnerable application attached to the exploit entry.
  if (sources.use_app_archives) {
    if (record.app_archive) {
      try {
        reset();
        if (extract_zip_file(*record.app_archive, dest) > 0) {
          return found(SourceKind::ExploitDbApp, record.app_archive->generic_string());
        }
        misses.push_back("app: empty archive");
      } catch (const std::exception& e) {
        misses.push_back(std::string("app: ") + e.what());
      }
    } else {
      misses.push_back("app: none attached");
    }
  }

  std::error_code ec;
  fs::remove_all(dest, ec);
  std::string why;
  for (const auto& m : misses) why += (why.empty() ? "" : "; ") + m;
  throw Error(ErrorCode::NoVulnerableApplication, std::string(to_string(kind)) + " " + std::string(slug) + ": " + why);
}

}  // namespace wpenv
