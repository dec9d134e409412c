#include "wpenv/iacgen.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "text.hpp"
#include "wpenv/error.hpp"

namespace wpenv {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr std::string_view kWebRoot = "/var/www/html";
constexpr std::string_view kImageSourceRoot = "/usr/src/wordpress";
constexpr std::string_view kProvenanceSchema = "wpenv-provenance/1";

std::string yaml_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string extension_dir(ComponentKind kind) { return kind == ComponentKind::Plugin ? "plugins" : "themes"; }

const FetchedComponent* component_for(const EnvironmentPlan& plan, std::string_view slug) {
  auto it = std::find_if(plan.components.begin(), plan.components.end(),
                         [&](const FetchedComponent& c) { return c.slug == slug; });
  return it == plan.components.end() ? nullptr : &*it;
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw Error(ErrorCode::WriteFailure, "cannot write " + path.string());
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::WriteFailure, "cannot read back " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

template <typename T>
void overlay(const nlohmann::json& doc, std::string_view key, T& target) {
  if (doc.contains(key)) target = doc.at(std::string(key)).get<T>();
}

void reject_unknown(const nlohmann::json& doc, std::initializer_list<std::string_view> allowed, std::string_view where) {
  for (const auto& [key, value] : doc.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::MalformedDocument, std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

nlohmann::json version_json(const std::optional<Version>& v) {
  return v ? nlohmann::json(v->raw()) : nlohmann::json(nullptr);
}

}  // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

GeneratorConfig config_from_json(const nlohmann::json& doc) {
  GeneratorConfig config;
  try {
    if (!doc.is_object()) throw Error(ErrorCode::MalformedDocument, "config must be a JSON object");
    reject_unknown(doc, {"image_repository", "extension_base_tag", "wp_cli_url", "db", "site", "probe_interval_s",
                         "probe_timeout_s"},
                   "config");
    overlay(doc, "image_repository", config.image_repository);
    if (doc.contains("extension_base_tag") && !doc["extension_base_tag"].is_null()) {
      config.extension_base_tag = doc["extension_base_tag"].get<std::string>();
    }
    overlay(doc, "wp_cli_url", config.wp_cli_url);
    if (doc.contains("db")) {
      const auto& db = doc["db"];
      reject_unknown(db, {"image", "database", "user", "password", "root_password"}, "config.db");
      overlay(db, "image", config.db.image);
      overlay(db, "database", config.db.database);
      overlay(db, "user", config.db.user);
      overlay(db, "password", config.db.password);
      overlay(db, "root_password", config.db.root_password);
    }
    if (doc.contains("site")) {
      const auto& site = doc["site"];
      reject_unknown(site, {"title", "host", "http_port", "admin_user", "admin_password", "admin_email",
                            "trainee_user", "trainee_password", "trainee_email"},
                     "config.site");
      overlay(site, "title", config.site.title);
      overlay(site, "host", config.site.host);
      overlay(site, "http_port", config.site.http_port);
      overlay(site, "admin_user", config.site.admin_user);
      overlay(site, "admin_password", config.site.admin_password);
      overlay(site, "admin_email", config.site.admin_email);
      overlay(site, "trainee_user", config.site.trainee_user);
      overlay(site, "trainee_password", config.site.trainee_password);
      overlay(site, "trainee_email", config.site.trainee_email);
    }
    if (doc.contains("probe_interval_s")) {
      config.probe_interval = std::chrono::seconds(doc["probe_interval_s"].get<std::int64_t>());
    }
    if (doc.contains("probe_timeout_s")) {
      config.probe_timeout = std::chrono::seconds(doc["probe_timeout_s"].get<std::int64_t>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("config: ") + e.what());
  }
  if (config.site.http_port <= 0 || config.site.http_port > 65535) {
    throw Error(ErrorCode::MalformedDocument, "config.site.http_port out of range");
  }
  return config;
}

nlohmann::json config_to_json(const GeneratorConfig& config) {
  return {
      {"image_repository", config.image_repository},
      {"extension_base_tag", config.extension_base_tag ? nlohmann::json(*config.extension_base_tag) : nullptr},
      {"wp_cli_url", config.wp_cli_url},
      {"db",
       {{"image", config.db.image},
        {"database", config.db.database},
        {"user", config.db.user},
        {"password", config.db.password},
        {"root_password", config.db.root_password}}},
      {"site",
       {{"title", config.site.title},
        {"host", config.site.host},
        {"http_port", config.site.http_port},
        {"admin_user", config.site.admin_user},
        {"admin_password", config.site.admin_password},
        {"admin_email", config.site.admin_email},
        {"trainee_user", config.site.trainee_user},
        {"trainee_password", config.site.trainee_password},
        {"trainee_email", config.site.trainee_email}}},
      {"probe_interval_s", std::chrono::duration_cast<std::chrono::seconds>(config.probe_interval).count()},
      {"probe_timeout_s", std::chrono::duration_cast<std::chrono::seconds>(config.probe_timeout).count()},
  };
}

// ---------------------------------------------------------------------------
// Plan
// ---------------------------------------------------------------------------

std::string SetupStep::label() const {
  switch (action) {
    case Action::InstallCore: return "InstallCore";
    case Action::CreateAdmin: return "CreateAdmin";
    case Action::CopyComponent: return "CopyComponent(" + slug + ")";
    case Action::ActivatePlugin: return "ActivatePlugin(" + slug + ")";
    case Action::ActivateTheme: return "ActivateTheme(" + slug + ")";
  }
  return "?";
}

EnvironmentPlan build_plan(EdbId edb_id, const ParsedTitle& parsed, const ImageRef& image,
                           std::vector<FetchedComponent> components, const GeneratorConfig& config) {
  if (parsed.category == ExploitCategory::Core && !components.empty()) {
    throw Error(ErrorCode::InvalidArgument, "core plans carry no extensions");
  }
  std::set<std::string> slugs;
  for (const auto& c : components) {
    if (!slugs.insert(c.slug).second) throw Error(ErrorCode::InvalidArgument, "duplicate component " + c.slug);
  }

  EnvironmentPlan plan;
  plan.edb_id = edb_id;
  plan.base_image = image;
  plan.db = config.db;
  plan.site = config.site;
  plan.wp_cli_url = config.wp_cli_url;
  plan.provenance.category = parsed.category;
  plan.provenance.version_constraint = parsed.version_expr;

  plan.setup_steps.push_back({SetupStep::Action::InstallCore, {}});
  plan.setup_steps.push_back({SetupStep::Action::CreateAdmin, {}});
  for (const auto& c : components) {
    plan.setup_steps.push_back({SetupStep::Action::CopyComponent, c.slug});
    plan.setup_steps.push_back({c.kind == ComponentKind::Plugin ? SetupStep::Action::ActivatePlugin
                                                                : SetupStep::Action::ActivateTheme,
                                c.slug});
  }
  plan.components = std::move(components);
  return plan;
}

std::vector<std::string> step_argv(const EnvironmentPlan& plan, const SetupStep& step) {
  const auto& site = plan.site;
  std::vector<std::string> argv{"wp"};
  switch (step.action) {
    case SetupStep::Action::InstallCore:
      argv.insert(argv.end(), {"core", "install", "--url=" + site.url(), "--title=" + site.title,
                               "--admin_user=" + site.admin_user, "--admin_password=" + site.admin_password,
                               "--admin_email=" + site.admin_email, "--skip-email"});
      break;
    case SetupStep::Action::CreateAdmin:
      argv.insert(argv.end(), {"user", "create", site.trainee_user, site.trainee_email, "--role=administrator",
                               "--user_pass=" + site.trainee_password});
      break;
    case SetupStep::Action::CopyComponent: {
      const auto* c = component_for(plan, step.slug);
      if (!c) throw Error(ErrorCode::InvalidArgument, "step references unknown component " + step.slug);
      argv.insert(argv.end(), {c->kind == ComponentKind::Plugin ? "plugin" : "theme", "is-installed", step.slug});
      break;
    }
    case SetupStep::Action::ActivatePlugin:
      argv.insert(argv.end(), {"plugin", "activate", step.slug});
      break;
    case SetupStep::Action::ActivateTheme:
      argv.insert(argv.end(), {"theme", "activate", step.slug});
      break;
  }
  argv.push_back("--path=" + std::string(kWebRoot));
  argv.push_back("--allow-root");
  return argv;
}

nlohmann::json plan_to_json(const EnvironmentPlan& plan) {
  nlohmann::json components = nlohmann::json::array();
  for (const auto& c : plan.components) {
    components.push_back({{"kind", to_string(c.kind)},
                          {"slug", c.slug},
                          {"version", version_json(c.version)},
                          {"source", to_string(c.source.kind)},
                          {"locator", c.source.locator},
                          {"payload_path", c.payload_path.generic_string()}});
  }
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : plan.setup_steps) steps.push_back(s.label());
  auto opt = [](const std::optional<std::string>& s) { return s ? nlohmann::json(*s) : nlohmann::json(nullptr); };
  GeneratorConfig config;
  config.db = plan.db;
  config.site = plan.site;
  auto cfg = config_to_json(config);
  return {
      {"edb_id", plan.edb_id},
      {"image",
       {{"repository", plan.base_image.repository},
        {"tag", plan.base_image.tag},
        {"version", plan.base_image.resolved_version.raw()}}},
      {"components", std::move(components)},
      {"db", cfg["db"]},
      {"site", cfg["site"]},
      {"wp_cli_url", plan.wp_cli_url},
      {"setup_steps", std::move(steps)},
      {"provenance",
       {{"title", plan.provenance.title},
        {"category", to_string(plan.provenance.category)},
        {"version_constraint", opt(plan.provenance.version_constraint)},
        {"version_origin", opt(plan.provenance.version_origin)},
        {"unused_app_archive", opt(plan.provenance.unused_app_archive)}}},
  };
}

namespace {

SetupStep step_from_label(const std::string& label) {
  using A = SetupStep::Action;
  if (label == "InstallCore") return {A::InstallCore, {}};
  if (label == "CreateAdmin") return {A::CreateAdmin, {}};
  for (auto [prefix, action] : {std::pair{"CopyComponent(", A::CopyComponent},
                                std::pair{"ActivatePlugin(", A::ActivatePlugin},
                                std::pair{"ActivateTheme(", A::ActivateTheme}}) {
    std::string_view p = prefix;
    if (label.starts_with(p) && label.ends_with(')') && label.size() > p.size() + 1) {
      return {action, label.substr(p.size(), label.size() - p.size() - 1)};
    }
  }
  throw Error(ErrorCode::MalformedDocument, "unknown setup step '" + label + "'");
}

std::optional<std::string> opt_string(const nlohmann::json& doc, const char* key) {
  const auto& v = doc.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<std::string>();
}

}  // namespace

EnvironmentPlan plan_from_json(const nlohmann::json& doc) {
  try {
    EnvironmentPlan plan;
    plan.edb_id = doc.at("edb_id").get<EdbId>();
    const auto& image = doc.at("image");
    plan.base_image = ImageRef{image.at("repository").get<std::string>(), image.at("tag").get<std::string>(),
                               parse_version(image.at("version").get<std::string>())};
    for (const auto& c : doc.at("components")) {
      FetchedComponent fc;
      auto kind = component_kind_from_string(c.at("kind").get<std::string>());
      auto source = source_kind_from_string(c.at("source").get<std::string>());
      if (!kind || !source) throw Error(ErrorCode::MalformedDocument, "bad component kind or source");
      fc.kind = *kind;
      fc.slug = c.at("slug").get<std::string>();
      if (auto v = opt_string(c, "version")) fc.version = parse_version(*v);
      fc.source = ComponentSource{*source, c.at("locator").get<std::string>()};
      fc.payload_path = c.at("payload_path").get<std::string>();
      plan.components.push_back(std::move(fc));
    }
    auto cfg = config_from_json({{"db", doc.at("db")}, {"site", doc.at("site")}});
    plan.db = cfg.db;
    plan.site = cfg.site;
    plan.wp_cli_url = doc.at("wp_cli_url").get<std::string>();
    for (const auto& s : doc.at("setup_steps")) plan.setup_steps.push_back(step_from_label(s.get<std::string>()));
    const auto& prov = doc.at("provenance");
    plan.provenance.title = prov.at("title").get<std::string>();
    auto category = category_from_string(prov.at("category").get<std::string>());
    if (!category) throw Error(ErrorCode::MalformedDocument, "bad category");
    plan.provenance.category = *category;
    plan.provenance.version_constraint = opt_string(prov, "version_constraint");
    plan.provenance.version_origin = opt_string(prov, "version_origin");
    plan.provenance.unused_app_archive = opt_string(prov, "unused_app_archive");
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("plan: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedDocument) throw;
    throw Error(ErrorCode::MalformedDocument, std::string("plan: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

std::string render_dockerfile(const EnvironmentPlan& plan) {
  std::ostringstream out;
  out << "# Generated by wpenv for EDB-" << plan.edb_id << ". Do not edit.\n";
  out << "FROM " << plan.base_image.reference() << "\n";
  out << "ADD " << plan.wp_cli_url << " /usr/local/bin/wp\n";
  out << "RUN chmod 0755 /usr/local/bin/wp\n";
  for (const auto& c : plan.components) {
    out << "COPY --chown=www-data:www-data components/" << c.slug << "/ " << kImageSourceRoot << "/wp-content/"
        << extension_dir(c.kind) << "/" << c.slug << "/\n";
  }
  return out.str();
}

std::string render_compose(const EnvironmentPlan& plan) {
  std::ostringstream out;
  out << "# Generated by wpenv for EDB-" << plan.edb_id << ". Do not edit.\n";
  out << "services:\n";
  out << "  wordpress:\n";
  out << "    build: .\n";
  out << "    container_name: " << plan.app_container() << "\n";
  out << "    depends_on:\n";
  out << "      - db\n";
  out << "    environment:\n";
  out << "      WORDPRESS_DB_HOST: " << yaml_quote("db:3306") << "\n";
  out << "      WORDPRESS_DB_NAME: " << yaml_quote(plan.db.database) << "\n";
  out << "      WORDPRESS_DB_PASSWORD: " << yaml_quote(plan.db.password) << "\n";
  out << "      WORDPRESS_DB_USER: " << yaml_quote(plan.db.user) << "\n";
  out << "    ports:\n";
  out << "      - " << yaml_quote(std::to_string(plan.site.http_port) + ":80") << "\n";
  out << "  db:\n";
  out << "    image: " << yaml_quote(plan.db.image) << "\n";
  out << "    container_name: " << plan.db_container() << "\n";
  out << "    environment:\n";
  out << "      MYSQL_DATABASE: " << yaml_quote(plan.db.database) << "\n";
  out << "      MYSQL_PASSWORD: " << yaml_quote(plan.db.password) << "\n";
  out << "      MYSQL_ROOT_PASSWORD: " << yaml_quote(plan.db.root_password) << "\n";
  out << "      MYSQL_USER: " << yaml_quote(plan.db.user) << "\n";
  return out.str();
}

std::string render_setup_script(const EnvironmentPlan& plan) {
  std::ostringstream out;
  out << "#!/bin/sh\n";
  out << "# Generated by wpenv for EDB-" << plan.edb_id << ". Do not edit.\n";
  out << "# Run inside the application container once " << plan.site.url() << "/wp-admin/index.php answers 200:\n";
  out << "#   docker exec -i " << plan.app_container() << " sh < setup.sh\n";
  out << "set -e\n";
  for (const auto& step : plan.setup_steps) {
    auto argv = step_argv(plan, step);
    for (std::size_t i = 0; i < argv.size(); ++i) {
      if (i) out << ' ';
      out << text::shell_quote(argv[i]);
    }
    out << "\n";
  }
  return out.str();
}

std::string format_timestamp(std::chrono::system_clock::time_point t) {
  std::time_t secs = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string render_provenance(const EnvironmentPlan& plan, std::chrono::system_clock::time_point generated_at) {
  auto opt = [](const std::optional<std::string>& s) { return s ? ojson(*s) : ojson(nullptr); };
  ojson components = ojson::array();
  for (const auto& c : plan.components) {
    ojson item;
    item["kind"] = to_string(c.kind);
    item["slug"] = c.slug;
    item["version"] = c.version ? ojson(c.version->str()) : ojson(nullptr);
    item["source"] = to_string(c.source.kind);
    item["locator"] = c.source.locator;
    components.push_back(std::move(item));
  }
  ojson steps = ojson::array();
  for (const auto& s : plan.setup_steps) steps.push_back(s.label());

  ojson doc;
  doc["schema"] = kProvenanceSchema;
  doc["edb_id"] = plan.edb_id;
  doc["title"] = plan.provenance.title;
  doc["category"] = to_string(plan.provenance.category);
  doc["generated_at"] = format_timestamp(generated_at);
  doc["image"] = ojson{{"repository", plan.base_image.repository},
                       {"tag", plan.base_image.tag},
                       {"version", plan.base_image.resolved_version.str()}};
  doc["version_constraint"] = opt(plan.provenance.version_constraint);
  doc["version_origin"] = opt(plan.provenance.version_origin);
  doc["components"] = std::move(components);
  doc["setup_steps"] = std::move(steps);
  doc["unused_app_archive"] = opt(plan.provenance.unused_app_archive);
  return doc.dump(2) + "\n";
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::WriteFailure, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

BundleManifest emit_bundle(const EnvironmentPlan& plan, const fs::path& out_dir,
                           std::chrono::system_clock::time_point generated_at) {
  const fs::path dir = out_dir / std::to_string(plan.edb_id);
  try {
    auto canonical_dir = fs::weakly_canonical(dir);
    for (const auto& c : plan.components) {
      auto rel = fs::weakly_canonical(c.payload_path).lexically_relative(canonical_dir);
      if (!rel.empty() && *rel.begin() != "..") {
        throw Error(ErrorCode::WriteFailure, "component payload lies inside the bundle directory: " +
                                                 c.payload_path.string());
      }
    }

    fs::remove_all(dir);
    fs::create_directories(dir);
    write_file(dir / "Dockerfile", render_dockerfile(plan));
    write_file(dir / "docker-compose.yml", render_compose(plan));
    write_file(dir / "setup.sh", render_setup_script(plan));
    fs::permissions(dir / "setup.sh", fs::perms::owner_exec | fs::perms::group_exec | fs::perms::others_exec,
                    fs::perm_options::add);
    write_file(dir / "provenance.json", render_provenance(plan, generated_at));
    for (const auto& c : plan.components) {
      fs::path target = dir / "components" / c.slug;
      fs::create_directories(target);
      fs::copy(c.payload_path, target, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
    }

    BundleManifest manifest;
    manifest.directory = dir;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      std::string content = read_all(entry.path());
      manifest.files.push_back(
          BundleFile{entry.path().lexically_relative(dir).generic_string(), sha256_hex(content), content.size()});
    }
    std::sort(manifest.files.begin(), manifest.files.end(),
              [](const BundleFile& a, const BundleFile& b) { return a.path < b.path; });
    return manifest;
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorCode::WriteFailure, e.what());
  }
}

// ---------------------------------------------------------------------------
// Compose subset
// ---------------------------------------------------------------------------

const ComposeService* ComposeDocument::find(std::string_view name) const {
  auto it = std::find_if(services.begin(), services.end(), [&](const ComposeService& s) { return s.name == name; });
  return it == services.end() ? nullptr : &*it;
}

namespace {

[[noreturn]] void compose_error(const YAML::Node& node, const std::string& why) {
  throw Error(ErrorCode::MalformedDocument,
              "compose line " + std::to_string(node.Mark().line + 1) + ": " + why);
}

std::string scalar(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar() || node.Scalar().empty()) compose_error(node, what + " must be a non-empty scalar");
  return node.Scalar();
}

bool valid_identifier(std::string_view s, bool env_name) {
  if (s.empty()) return false;
  auto first = static_cast<unsigned char>(s.front());
  if (env_name ? !(std::isalpha(first) || first == '_') : !(std::islower(first) || std::isdigit(first))) return false;
  return std::all_of(s.begin(), s.end(), [&](unsigned char c) {
    return env_name ? (std::isalnum(c) || c == '_') : (std::islower(c) || std::isdigit(c) || c == '_' || c == '-');
  });
}

bool valid_port_mapping(std::string_view s) {
  auto parts = text::split(s, ':');
  if (parts.size() != 2) return false;
  for (auto p : parts) {
    if (p.empty() || p.size() > 5 || !std::all_of(p.begin(), p.end(), [](unsigned char c) { return std::isdigit(c); })) {
      return false;
    }
    int port = std::stoi(std::string(p));
    if (port < 1 || port > 65535) return false;
  }
  return true;
}

std::vector<std::string> scalar_list(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence()) compose_error(node, what + " must be a list");
  std::vector<std::string> out;
  for (const auto& item : node) out.push_back(scalar(item, what + " entry"));
  return out;
}

}  // namespace

ComposeDocument parse_compose_subset(std::string_view yaml) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("compose: ") + e.what());
  }
  if (!root.IsMap()) throw Error(ErrorCode::MalformedDocument, "compose: top level must be a mapping");
  for (const auto& kv : root) {
    if (kv.first.as<std::string>() != "services") compose_error(kv.first, "only 'services' is supported at top level");
  }
  const YAML::Node services = root["services"];
  if (!services || !services.IsMap() || services.size() == 0) {
    throw Error(ErrorCode::MalformedDocument, "compose: 'services' must be a non-empty mapping");
  }

  ComposeDocument doc;
  for (const auto& entry : services) {
    ComposeService service;
    service.name = scalar(entry.first, "service name");
    if (!valid_identifier(service.name, false)) compose_error(entry.first, "bad service name '" + service.name + "'");
    if (!entry.second.IsMap()) compose_error(entry.second, "service '" + service.name + "' must be a mapping");
    for (const auto& kv : entry.second) {
      const std::string key = scalar(kv.first, "service key");
      const YAML::Node& value = kv.second;
      if (key == "image") {
        service.image = scalar(value, key);
      } else if (key == "build") {
        service.build = scalar(value, key);
      } else if (key == "container_name") {
        service.container_name = scalar(value, key);
      } else if (key == "depends_on") {
        service.depends_on = scalar_list(value, key);
      } else if (key == "ports") {
        service.ports = scalar_list(value, key);
        for (const auto& port : service.ports) {
          if (!valid_port_mapping(port)) compose_error(value, "bad port mapping '" + port + "'");
        }
      } else if (key == "environment") {
        if (!value.IsMap()) compose_error(value, "environment must be a mapping");
        for (const auto& env : value) {
          std::string name = scalar(env.first, "environment name");
          if (!valid_identifier(name, true)) compose_error(env.first, "bad environment name '" + name + "'");
          service.environment.emplace_back(name, env.second.IsScalar() ? env.second.Scalar() : std::string());
          if (!env.second.IsScalar()) compose_error(env.second, "environment value must be a scalar");
        }
      } else {
        compose_error(kv.first, "unsupported service key '" + key + "'");
      }
    }
    doc.services.push_back(std::move(service));
  }

  for (const auto& s : doc.services) {
    if (s.image.has_value() == s.build.has_value()) {
      throw Error(ErrorCode::MalformedDocument, "service '" + s.name + "' needs exactly one of image/build");
    }
    for (const auto& dep : s.depends_on) {
      if (!doc.find(dep) || dep == s.name) {
        throw Error(ErrorCode::MalformedDocument, "service '" + s.name + "' depends on unknown '" + dep + "'");
      }
    }
  }
  return doc;
}

std::vector<std::string> dockerfile_copy_targets(std::string_view dockerfile) {
  std::vector<std::string> targets;
  for (std::string_view line : text::split_lines(dockerfile)) {
    auto tokens = text::split_whitespace(line);
    if (tokens.empty() || !text::iequals(tokens.front(), "COPY")) continue;
    std::vector<std::string_view> args;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      if (!tokens[i].starts_with("--")) args.push_back(tokens[i]);
    }
    if (args.size() >= 2) targets.emplace_back(args.back());
  }
  return targets;
}

std::vector<std::string> validate_provenance(const nlohmann::json& doc) {
  std::vector<std::string> problems;
  auto need = [&](const nlohmann::json& obj, const std::string& key, auto predicate, const char* type,
                  const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
      problems.push_back(where + key + ": missing");
      return false;
    }
    if (!predicate(obj.at(key))) {
      problems.push_back(where + key + ": expected " + type);
      return false;
    }
    return true;
  };
  auto is_string = [](const nlohmann::json& v) { return v.is_string(); };
  auto is_nonempty_string = [](const nlohmann::json& v) { return v.is_string() && !v.get<std::string>().empty(); };
  auto string_or_null = [](const nlohmann::json& v) { return v.is_string() || v.is_null(); };

  if (!doc.is_object()) return {"document: expected object"};
  static const std::set<std::string> kKeys = {"schema",     "edb_id",  "title",          "category",
                                              "generated_at", "image", "version_constraint", "version_origin",
                                              "components", "setup_steps", "unused_app_archive"};
  for (const auto& [key, value] : doc.items()) {
    if (!kKeys.contains(key)) problems.push_back(key + ": unexpected key");
  }
  if (need(doc, "schema", is_string, "string", "") && doc["schema"] != kProvenanceSchema) {
    problems.push_back("schema: unsupported value");
  }
  need(doc, "edb_id", [](const nlohmann::json& v) { return v.is_number_integer() && v.get<std::int64_t>() > 0; },
       "positive integer", "");
  need(doc, "title", is_string, "string", "");
  if (need(doc, "category", is_string, "string", "")) {
    auto c = category_from_string(doc["category"].get<std::string>());
    if (!c || *c == ExploitCategory::Uncategorized) problems.push_back("category: expected Core, Plugin or Theme");
  }
  if (need(doc, "generated_at", is_string, "string", "")) {
    const auto s = doc["generated_at"].get<std::string>();
    if (s.size() != 20 || s[10] != 'T' || s.back() != 'Z' || !parse_date(s.substr(0, 10))) {
      problems.push_back("generated_at: expected YYYY-MM-DDTHH:MM:SSZ");
    }
  }
  if (need(doc, "image", [](const nlohmann::json& v) { return v.is_object(); }, "object", "")) {
    const auto& image = doc["image"];
    need(image, "repository", is_nonempty_string, "non-empty string", "image.");
    need(image, "tag", is_nonempty_string, "non-empty string", "image.");
    if (need(image, "version", is_string, "string", "image.") &&
        !try_parse_numeric_version(image["version"].get<std::string>())) {
      problems.push_back("image.version: expected dotted-numeric version");
    }
  }
  need(doc, "version_constraint", string_or_null, "string or null", "");
  if (need(doc, "version_origin", string_or_null, "string or null", "") && doc["version_origin"].is_string()) {
    auto o = doc["version_origin"].get<std::string>();
    if (o != "title" && o != "poc" && o != "cpe") problems.push_back("version_origin: expected title, poc or cpe");
  }
  if (need(doc, "components", [](const nlohmann::json& v) { return v.is_array(); }, "array", "")) {
    std::size_t i = 0;
    for (const auto& c : doc["components"]) {
      std::string where = "components[" + std::to_string(i++) + "].";
      if (need(c, "kind", is_string, "string", where) && !component_kind_from_string(c["kind"].get<std::string>())) {
        problems.push_back(where + "kind: expected Plugin or Theme");
      }
      if (need(c, "slug", is_nonempty_string, "non-empty string", where)) {
        try {
          if (derive_slug(c["slug"].get<std::string>()) != c["slug"].get<std::string>()) {
            problems.push_back(where + "slug: not normalized");
          }
        } catch (const Error&) {
          problems.push_back(where + "slug: not normalized");
        }
      }
      need(c, "version", string_or_null, "string or null", where);
      if (need(c, "source", is_string, "string", where) && !source_kind_from_string(c["source"].get<std::string>())) {
        problems.push_back(where + "source: expected SvnRepo, SoftwareLink or ExploitDbApp");
      }
      need(c, "locator", is_nonempty_string, "non-empty string", where);
    }
  }
  if (need(doc, "setup_steps", [](const nlohmann::json& v) { return v.is_array(); }, "array", "")) {
    for (const auto& s : doc["setup_steps"]) {
      if (!s.is_string()) problems.push_back("setup_steps: expected strings");
    }
  }
  need(doc, "unused_app_archive", string_or_null, "string or null", "");
  return problems;
}

}  // namespace wpenv
