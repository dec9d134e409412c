#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "wpenv/corpus.hpp"
#include "wpenv/resolvers.hpp"
#include "wpenv/title.hpp"

namespace wpenv {

struct DbSpec {
  std::string image = "mysql:5.7";
  std::string database = "wordpress";
  std::string user = "wordpress";
  std::string password = "wordpress";
  std::string root_password = "wpenv-root";

  friend bool operator==(const DbSpec&, const DbSpec&) = default;
};

/// Site settings. `admin_*` is the account `wp core install` creates;
/// `trainee_*` is the extra administrator added by the CreateAdmin step.
struct SiteSpec {
  std::string title = "Vulnerable WordPress";
  std::string host = "localhost";
  int http_port = 8080;
  std::string admin_user = "admin";
  std::string admin_password = "wpenv-admin";
  std::string admin_email = "admin@example.com";
  std::string trainee_user = "trainee";
  std::string trainee_password = "wpenv-trainee";
  std::string trainee_email = "trainee@example.com";

  std::string url() const { return "http://" + host + ":" + std::to_string(http_port); }
  friend bool operator==(const SiteSpec&, const SiteSpec&) = default;
};

struct GeneratorConfig {
  std::string image_repository = "wordpress";
  /// Base tag for extension exploits; highest available tag when unset.
  std::optional<std::string> extension_base_tag;
  std::string wp_cli_url = "https://raw.githubusercontent.com/wp-cli/builds/gh-pages/phar/wp-cli.phar";
  DbSpec db;
  SiteSpec site;
  std::chrono::milliseconds probe_interval{std::chrono::seconds(10)};
  std::chrono::milliseconds probe_timeout{std::chrono::seconds(300)};
};

/// Overlays the keys present in `doc` onto the defaults. Unknown keys are
/// rejected with Error(MalformedDocument).
GeneratorConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const GeneratorConfig& config);

struct SetupStep {
  enum class Action { InstallCore, CreateAdmin, CopyComponent, ActivatePlugin, ActivateTheme };
  Action action = Action::InstallCore;
  std::string slug;  // empty for InstallCore and CreateAdmin

  std::string label() const;
  friend bool operator==(const SetupStep&, const SetupStep&) = default;
};

/// Extra fields carried into provenance.json.
struct PlanProvenance {
  std::string title;
  ExploitCategory category = ExploitCategory::Uncategorized;
  std::optional<std::string> version_constraint;
  std::optional<std::string> version_origin;  // "title", "poc" or "cpe"
  std::optional<std::string> unused_app_archive;

  friend bool operator==(const PlanProvenance&, const PlanProvenance&) = default;
};

struct EnvironmentPlan {
  EdbId edb_id = 0;
  ImageRef base_image{"wordpress", "latest", Version({0})};
  std::vector<FetchedComponent> components;
  DbSpec db;
  SiteSpec site;
  std::string wp_cli_url;
  std::vector<SetupStep> setup_steps;
  PlanProvenance provenance;

  std::string app_container() const { return "wpenv-" + std::to_string(edb_id) + "-wordpress"; }
  std::string db_container() const { return "wpenv-" + std::to_string(edb_id) + "-db"; }
  friend bool operator==(const EnvironmentPlan&, const EnvironmentPlan&) = default;
};

/// Orders steps as InstallCore, CreateAdmin, then CopyComponent + Activate*
/// per component. Throws Error(InvalidArgument) on duplicate slugs.
EnvironmentPlan build_plan(EdbId edb_id, const ParsedTitle& parsed, const ImageRef& image,
                           std::vector<FetchedComponent> components, const GeneratorConfig& config);

/// WP-CLI argv for one step, run inside the application container.
std::vector<std::string> step_argv(const EnvironmentPlan& plan, const SetupStep& step);

nlohmann::json plan_to_json(const EnvironmentPlan& plan);
EnvironmentPlan plan_from_json(const nlohmann::json& doc);

struct BundleFile {
  std::string path;  // relative to the bundle directory, '/' separated
  std::string sha256;
  std::uintmax_t size = 0;

  friend bool operator==(const BundleFile&, const BundleFile&) = default;
};

struct BundleManifest {
  std::filesystem::path directory;
  std::vector<BundleFile> files;  // sorted by path

  friend bool operator==(const BundleManifest&, const BundleManifest&) = default;
};

std::string render_dockerfile(const EnvironmentPlan& plan);
std::string render_compose(const EnvironmentPlan& plan);
std::string render_setup_script(const EnvironmentPlan& plan);
std::string render_provenance(const EnvironmentPlan& plan, std::chrono::system_clock::time_point generated_at);

/// Writes `<out_dir>/<edb_id>/{Dockerfile, docker-compose.yml, setup.sh,
/// provenance.json, components/<slug>/...}`, replacing any previous bundle.
/// Throws Error(WriteFailure).
BundleManifest emit_bundle(const EnvironmentPlan& plan, const std::filesystem::path& out_dir,
                           std::chrono::system_clock::time_point generated_at);

/// Digest of a file's bytes as lower-case hex.
std::string sha256_hex(std::string_view bytes);

// ---------------------------------------------------------------------------
// Validation of emitted documents
// ---------------------------------------------------------------------------

struct ComposeService {
  std::string name;
  std::optional<std::string> image;
  std::optional<std::string> build;
  std::optional<std::string> container_name;
  std::vector<std::string> depends_on;
  std::vector<std::pair<std::string, std::string>> environment;
  std::vector<std::string> ports;
};

struct ComposeDocument {
  std::vector<ComposeService> services;
  const ComposeService* find(std::string_view name) const;
};

/// Parses the compose subset documented in docs/compose-subset.md.
/// Throws Error(MalformedDocument) with a line number on any deviation.
ComposeDocument parse_compose_subset(std::string_view yaml);

/// Container-side COPY targets in a build file, in order.
std::vector<std::string> dockerfile_copy_targets(std::string_view dockerfile);

/// Empty when `doc` matches the provenance schema; otherwise one message per problem.
std::vector<std::string> validate_provenance(const nlohmann::json& doc);

std::string format_timestamp(std::chrono::system_clock::time_point t);

}  // namespace wpenv
