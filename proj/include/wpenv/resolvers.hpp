#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wpenv/corpus.hpp"
#include "wpenv/version.hpp"

namespace wpenv {

// ---------------------------------------------------------------------------
// Base image
// ---------------------------------------------------------------------------

struct ImageRef {
  std::string repository;
  std::string tag;
  Version resolved_version;

  std::string reference() const { return repository + ":" + tag; }
  friend bool operator==(const ImageRef&, const ImageRef&) = default;
};

/// Oldest WordPress release published as an official container image.
const Version& minimum_image_version();

/// Lists the tags of one image repository. Must tolerate concurrent calls.
class RegistryClient {
 public:
  virtual ~RegistryClient() = default;
  virtual std::string repository() const = 0;
  /// Throws Error(RegistryUnavailable) on transport failure.
  virtual std::vector<std::string> list_tags() const = 0;
};

class FixtureRegistry final : public RegistryClient {
 public:
  FixtureRegistry(std::string repository, std::vector<std::string> tags);
  /// Reads a JSON array of tag strings.
  static FixtureRegistry from_file(const std::filesystem::path& path, std::string repository = "wordpress");

  std::string repository() const override { return repository_; }
  std::vector<std::string> list_tags() const override { return tags_; }

 private:
  std::string repository_;
  std::vector<std::string> tags_;
};

/// Docker Hub v2 tag listing for an official (`library/`) repository.
class DockerHubRegistry final : public RegistryClient {
 public:
  explicit DockerHubRegistry(std::string repository = "wordpress", std::string base_url = "https://hub.docker.com");

  std::string repository() const override { return repository_; }
  std::vector<std::string> list_tags() const override;

 private:
  std::string repository_;
  std::string base_url_;
};

/// Highest version among the purely numeric `tags` satisfying `constraint`
/// and not below `floor`. Returns the tag text and its version.
std::optional<std::pair<std::string, Version>> highest_satisfying(const std::vector<std::string>& tags,
                                                                  const VersionConstraint* constraint,
                                                                  const std::optional<Version>& floor);

/// Highest available tag satisfying `constraint`, never below 3.1.0.
/// Throws Error(NoImage) or Error(RegistryUnavailable).
ImageRef find_core_image(const VersionConstraint& constraint, const RegistryClient& registry);
/// Highest available tag at or above 3.1.0, used as the base for extensions.
ImageRef find_latest_image(const RegistryClient& registry);

// ---------------------------------------------------------------------------
// Extensions
// ---------------------------------------------------------------------------

enum class ComponentKind { Plugin, Theme };
enum class SourceKind { SvnRepo, SoftwareLink, ExploitDbApp };

std::string_view to_string(ComponentKind kind) noexcept;
std::string_view to_string(SourceKind kind) noexcept;
std::optional<ComponentKind> component_kind_from_string(std::string_view name) noexcept;
std::optional<SourceKind> source_kind_from_string(std::string_view name) noexcept;

struct ComponentSource {
  SourceKind kind = SourceKind::SvnRepo;
  std::string locator;

  friend bool operator==(const ComponentSource&, const ComponentSource&) = default;
};

struct FetchedComponent {
  ComponentKind kind = ComponentKind::Plugin;
  std::string slug;
  std::optional<Version> version;
  ComponentSource source;
  std::filesystem::path payload_path;

  friend bool operator==(const FetchedComponent&, const FetchedComponent&) = default;
};

/// Lower-case, non-alphanumeric runs become one hyphen, edges trimmed.
/// Throws Error(EmptySlug).
std::string derive_slug(std::string_view product);

/// Repository layout below one root: `<root>/<slug>/<tags_dir>/<version>/`
/// and `<root>/<slug>/<trunk_dir>/`. An empty tags_dir puts versions
/// directly under the slug; no trunk_dir disables trunk checkouts.
struct SvnLayout {
  std::string root;
  std::string tags_dir = "tags";
  std::optional<std::string> trunk_dir = "trunk";
};

class SvnClient {
 public:
  virtual ~SvnClient() = default;
  /// Tag names under the slug; empty when the slug is unknown.
  virtual std::vector<std::string> list_tags(ComponentKind kind, std::string_view slug) const = 0;
  /// Copies the tag (or trunk when `tag` is empty) into `dest`. False on a miss.
  virtual bool checkout(ComponentKind kind, std::string_view slug, std::string_view tag,
                        const std::filesystem::path& dest) const = 0;
  virtual std::string locator(ComponentKind kind, std::string_view slug, std::string_view tag) const = 0;
};

/// Serves a checked-out tree from disk.
class DirectorySvnClient final : public SvnClient {
 public:
  DirectorySvnClient(SvnLayout plugins, SvnLayout themes);

  std::vector<std::string> list_tags(ComponentKind kind, std::string_view slug) const override;
  bool checkout(ComponentKind kind, std::string_view slug, std::string_view tag,
                const std::filesystem::path& dest) const override;
  std::string locator(ComponentKind kind, std::string_view slug, std::string_view tag) const override;

 private:
  const SvnLayout& layout(ComponentKind kind) const { return kind == ComponentKind::Plugin ? plugins_ : themes_; }
  std::filesystem::path dir(ComponentKind kind, std::string_view slug, std::string_view tag) const;

  SvnLayout plugins_;
  SvnLayout themes_;
};

/// Plain HTTP directory retrieval from a Subversion web listing.
class HttpSvnClient final : public SvnClient {
 public:
  HttpSvnClient(SvnLayout plugins, SvnLayout themes);
  /// Public plugin and theme repositories.
  static HttpSvnClient wordpress_org();

  std::vector<std::string> list_tags(ComponentKind kind, std::string_view slug) const override;
  bool checkout(ComponentKind kind, std::string_view slug, std::string_view tag,
                const std::filesystem::path& dest) const override;
  std::string locator(ComponentKind kind, std::string_view slug, std::string_view tag) const override;

  /// `href` targets of an SVN HTML index, excluding parent and external links.
  static std::vector<std::string> parse_listing(std::string_view html);

 private:
  const SvnLayout& layout(ComponentKind kind) const { return kind == ComponentKind::Plugin ? plugins_ : themes_; }

  SvnLayout plugins_;
  SvnLayout themes_;
};

/// Downloads a software link. nullopt is a miss.
class LinkClient {
 public:
  virtual ~LinkClient() = default;
  virtual std::optional<std::string> download(std::string_view url) const = 0;
};

/// URL -> local file map, read from a JSON object whose values are paths
/// relative to the JSON file.
class FixtureLinkClient final : public LinkClient {
 public:
  explicit FixtureLinkClient(std::map<std::string, std::filesystem::path> files);
  static FixtureLinkClient from_file(const std::filesystem::path& path);

  std::optional<std::string> download(std::string_view url) const override;

 private:
  std::map<std::string, std::filesystem::path> files_;
};

class HttpLinkClient final : public LinkClient {
 public:
  std::optional<std::string> download(std::string_view url) const override;
};

struct SourceClients {
  std::shared_ptr<const SvnClient> svn;
  std::shared_ptr<const LinkClient> links;
  bool use_app_archives = true;
};

struct FetchOptions {
  /// Check out trunk when no version is requested.
  bool allow_trunk = true;
};

/// True when the URL path ends in `.zip`.
bool is_archive_link(std::string_view url);

/// Tries, in order: the SVN tag (or trunk), the PoC software link, the
/// attached exploit-database archive. Payload lands in
/// `<work_dir>/<edb_id>/components/<slug>/`.
/// Throws Error(NoVulnerableApplication) when every source misses.
FetchedComponent fetch_component(ComponentKind kind, std::string_view slug, const std::optional<Version>& version,
                                 const ExploitRecord& record, const SourceClients& sources,
                                 const std::filesystem::path& work_dir, const FetchOptions& options = {});

}  // namespace wpenv
