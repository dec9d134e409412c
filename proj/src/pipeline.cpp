#include "wpenv/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <set>

#include "wpenv/error.hpp"
#include "wpenv/title.hpp"

namespace wpenv {

namespace fs = std::filesystem;

namespace {

constexpr std::array kReasonNames{
    std::pair{FailureReason::UnparsableTitle, std::string_view("UnparsableTitle")},
    std::pair{FailureReason::NoVulnerableApplication, std::string_view("NoVulnerableApplication")},
    std::pair{FailureReason::NoImage, std::string_view("NoImage")},
    std::pair{FailureReason::ErrorDuringSetup, std::string_view("ErrorDuringSetup")},
    std::pair{FailureReason::UnknownVersion, std::string_view("UnknownVersion")},
    std::pair{FailureReason::FetchFailure, std::string_view("FetchFailure")},
};

// Unwinds out of generate() with a typed failure.
struct Failed {
  FailureReason reason;
  std::string detail;
};

FailureReason reason_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoImage: return FailureReason::NoImage;
    case ErrorCode::NoVulnerableApplication: return FailureReason::NoVulnerableApplication;
    case ErrorCode::EmptySlug:
    case ErrorCode::UnparsableVersion: return FailureReason::UnparsableTitle;
    case ErrorCode::WriteFailure:
    case ErrorCode::BootstrapTimeout:
    case ErrorCode::SetupStepFailed: return FailureReason::ErrorDuringSetup;
    default: return FailureReason::FetchFailure;
  }
}

struct ResolvedVersion {
  std::optional<VersionConstraint> constraint;
  std::optional<std::string> origin;
  bool dictionary_unavailable = false;
};

std::optional<VersionConstraint> constraint_from_cpe(const ExploitRecord& record, const CpeDictionary& dict,
                                                     ExploitCategory category, const std::string& slug,
                                                     bool& unavailable) {
  std::set<Version> versions;
  for (const auto& cve : record.cve_ids) {
    std::vector<CpeEntry> entries;
    try {
      entries = resolve_versions_from_cve(cve, dict);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DictionaryUnavailable) unavailable = true;
      continue;
    }
    std::vector<const CpeEntry*> matched;
    for (const auto& e : entries) {
      bool is_core = e.product == "wordpress";
      if (category == ExploitCategory::Core ? is_core : (e.product == slug || e.product == "wp-" + slug)) {
        matched.push_back(&e);
      }
    }
    // Extension CPE products often differ from the slug; fall back to every
    // non-core entry rather than dropping the information.
    if (matched.empty() && category != ExploitCategory::Core) {
      for (const auto& e : entries) {
        if (e.product != "wordpress") matched.push_back(&e);
      }
    }
    for (const auto* e : matched) versions.insert(e->version);
  }
  if (versions.empty()) return std::nullopt;
  if (versions.size() == 1) return VersionConstraint::exact(*versions.begin());
  return VersionConstraint::one_of({versions.begin(), versions.end()});
}

ResolvedVersion resolve_version(const ExploitRecord& record, const ParsedTitle& parsed, const std::string& slug,
                                const Services& services) {
  ResolvedVersion out;
  if (parsed.version_expr) {
    out.constraint = parse_version_expr(*parsed.version_expr);
    out.origin = "title";
  } else if (auto poc = extract_version_from_poc(record)) {
    out.constraint = std::move(poc);
    out.origin = "poc";
  } else if (services.cpe && !record.cve_ids.empty()) {
    out.constraint = constraint_from_cpe(record, *services.cpe, parsed.category, slug, out.dictionary_unavailable);
    if (out.constraint) out.origin = "cpe";
  }
  return out;
}

// Concrete version to fetch for an extension.
std::optional<Version> fetch_target(const VersionConstraint& constraint, ComponentKind kind,
                                                     const std::string& slug, const SourceClients& sources) {
  if (constraint.kind() == VersionConstraint::Kind::Exact) return constraint.front();
  std::vector<std::string> tags;
  if (sources.svn) {
    try {
      tags = sources.svn->list_tags(kind, slug);
    } catch (const std::exception&) {
      tags.clear();
    }
  }
  if (auto best = highest_satisfying(tags, &constraint, std::nullopt)) return best->second;
  if (constraint.kind() == VersionConstraint::Kind::Set) {
    auto values = constraint.values();
    return *std::max_element(values.begin(), values.end());
  }
  // An open upper bound with no matching tag. Trunk is past the fix, so only
  // the link and app sources remain.
  return std::nullopt;
}

ImageRef extension_image(const Services& services) {
  if (const auto& tag = services.config.extension_base_tag) {
    auto v = try_parse_version(*tag);
    return ImageRef{services.registry->repository(), *tag, v ? *v : Version({0})};
  }
  return find_latest_image(*services.registry);
}

class ScratchGuard {
 public:
  explicit ScratchGuard(fs::path dir) : dir_(std::move(dir)) {}
  ~ScratchGuard() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }
  ScratchGuard(const ScratchGuard&) = delete;
  ScratchGuard& operator=(const ScratchGuard&) = delete;

 private:
  fs::path dir_;
};

void bootstrap(const BundleManifest& manifest, const EnvironmentPlan& plan, const Services& services) {
  if (!services.executor || !services.probe_client) {
    throw Failed{FailureReason::ErrorDuringSetup, "bootstrap requested without executor or probe client"};
  }
  auto started = services.executor->start_stack(manifest.directory);
  if (started.exit_status != 0) {
    throw Failed{FailureReason::ErrorDuringSetup, "stack failed to start: " + started.output};
  }
  auto probe = ReadinessProbe::for_site(plan.site, services.config.probe_interval, services.config.probe_timeout);
  auto clock = services.make_clock();
  wait_ready(probe, *services.probe_client, *clock);
  require_success(run_setup(plan, *services.executor));
}

EnvironmentPlan plan_for(const ExploitRecord& record, const Services& services) {
  const ParsedTitle parsed = parse_title(record.title);
  if (parsed.category == ExploitCategory::Uncategorized) {
    throw Failed{FailureReason::UnparsableTitle, "title does not follow the WordPress title pattern"};
  }
  const bool core = parsed.category == ExploitCategory::Core;
  std::string slug;
  if (!core) slug = derive_slug(parsed.product.value_or(""));

  ResolvedVersion version = resolve_version(record, parsed, slug, services);
  if (!version.constraint) {
    if (version.dictionary_unavailable && (core || !record.app_archive)) {
      throw Failed{FailureReason::FetchFailure, "CPE dictionary unavailable"};
    }
    if (core) throw Failed{FailureReason::UnknownVersion, "no WordPress version in title, PoC or CPE data"};
    if (!record.app_archive) {
      throw Failed{FailureReason::NoVulnerableApplication, "no version and no attached vulnerable application"};
    }
  }

  std::optional<ImageRef> image;
  std::vector<FetchedComponent> components;
  if (core) {
    try {
      image = find_core_image(*version.constraint, *services.registry);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoImage || !record.app_archive) throw;
      throw Failed{FailureReason::NoImage,
                   std::string(e.what()) + " (attached application archive unused: " +
                       record.app_archive->generic_string() + ")"};
    }
  } else {
    ComponentKind kind = parsed.category == ExploitCategory::Plugin ? ComponentKind::Plugin : ComponentKind::Theme;
    std::optional<Version> target;
    FetchOptions options;
    // Trunk only stands in when nothing pins a version.
    options.allow_trunk = !version.constraint;
    if (version.constraint) target = fetch_target(*version.constraint, kind, slug, services.sources);
    components.push_back(
        fetch_component(kind, slug, target, record, services.sources, services.scratch_dir(), options));
    image = extension_image(services);
  }

  EnvironmentPlan plan = build_plan(record.edb_id, parsed, *image, std::move(components), services.config);
  plan.provenance.title = record.title;
  plan.provenance.version_constraint =
      version.constraint ? std::optional<std::string>(version.constraint->render()) : std::nullopt;
  plan.provenance.version_origin = version.origin;
  if (core && record.app_archive) plan.provenance.unused_app_archive = record.app_archive->generic_string();
  return plan;
}

}  // namespace

std::string_view to_string(FailureReason reason) noexcept {
  for (auto [r, name] : kReasonNames) {
    if (r == reason) return name;
  }
  return "?";
}

std::optional<FailureReason> failure_reason_from_string(std::string_view name) noexcept {
  for (auto [r, n] : kReasonNames) {
    if (n == name) return r;
  }
  return std::nullopt;
}

std::vector<std::string> CachingRegistry::list_tags() const {
  std::lock_guard lock(mutex_);
  if (!tags_) tags_ = inner_->list_tags();
  return *tags_;
}

Services offline_services(const fs::path& fixtures_dir, const fs::path& out_dir) {
  Services services;
  services.out_dir = out_dir;
  services.registry = std::make_shared<FixtureRegistry>(FixtureRegistry::from_file(fixtures_dir / "registry_tags.json"));
  if (fs::exists(fixtures_dir / "cpe.json")) {
    services.cpe = std::make_shared<FixtureCpeDictionary>(FixtureCpeDictionary::from_file(fixtures_dir / "cpe.json"));
  }
  if (fs::exists(fixtures_dir / "links.json")) {
    services.sources.links = std::make_shared<FixtureLinkClient>(FixtureLinkClient::from_file(fixtures_dir / "links.json"));
  }
  if (fs::is_directory(fixtures_dir / "svn")) {
    services.sources.svn = std::make_shared<DirectorySvnClient>(
        SvnLayout{(fixtures_dir / "svn" / "plugins").string()}, SvnLayout{(fixtures_dir / "svn" / "themes").string()});
  }
  services.probe_client = std::make_shared<HttpStatusClient>();
  services.executor = std::make_shared<ProcessExecutor>();
  return services;
}

Services live_services(const fs::path& out_dir) {
  Services services;
  services.out_dir = out_dir;
  services.registry = std::make_shared<CachingRegistry>(std::make_shared<DockerHubRegistry>());
  std::optional<std::string> key;
  if (const char* env = std::getenv("NVD_API_KEY"); env && *env) key = env;
  services.cpe = std::make_shared<NvdCpeDictionary>("https://services.nvd.nist.gov", key);
  services.sources.svn = std::make_shared<HttpSvnClient>(HttpSvnClient::wordpress_org());
  services.sources.links = std::make_shared<HttpLinkClient>();
  services.probe_client = std::make_shared<HttpStatusClient>();
  services.executor = std::make_shared<ProcessExecutor>();
  return services;
}

GenerationOutcome generate(const ExploitRecord& record, const Services& services, Mode mode) {
  const auto started = std::chrono::steady_clock::now();
  GenerationOutcome outcome;
  outcome.edb_id = record.edb_id;
  auto fail = [&](FailureReason reason, std::string detail) {
    outcome.status = GenerationOutcome::Status::Failure;
    outcome.reason = reason;
    outcome.detail = std::move(detail);
    outcome.plan.reset();
    outcome.manifest.reset();
  };

  try {
    if (!services.registry) throw Error(ErrorCode::InvalidArgument, "no registry client configured");
    ScratchGuard scratch(services.scratch_dir() / std::to_string(record.edb_id));
    EnvironmentPlan plan = plan_for(record, services);
    BundleManifest manifest = emit_bundle(plan, services.out_dir, services.wall_clock());
    if (mode == Mode::EmitAndBootstrap) bootstrap(manifest, plan, services);
    outcome.status = GenerationOutcome::Status::Success;
    outcome.plan = std::move(plan);
    outcome.manifest = std::move(manifest);
  } catch (const Failed& f) {
    fail(f.reason, f.detail);
  } catch (const Error& e) {
    fail(reason_for(e.code()), e.what());
  } catch (const std::exception& e) {
    fail(FailureReason::FetchFailure, e.what());
  }
  outcome.elapsed = std::chrono::duration_cast<Duration>(std::chrono::steady_clock::now() - started);
  return outcome;
}

nlohmann::json outcome_to_json(const GenerationOutcome& outcome) {
  nlohmann::json manifest = nullptr;
  if (outcome.manifest) {
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : outcome.manifest->files) {
      files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"size", f.size}});
    }
    manifest = {{"directory", outcome.manifest->directory.generic_string()}, {"files", std::move(files)}};
  }
  return {
      {"edb_id", outcome.edb_id},
      {"status", outcome.success() ? "Success" : "Failure"},
      {"reason", outcome.reason ? nlohmann::json(to_string(*outcome.reason)) : nlohmann::json(nullptr)},
      {"detail", outcome.detail},
      {"elapsed_ms", outcome.elapsed.count()},
      {"plan", outcome.plan ? plan_to_json(*outcome.plan) : nlohmann::json(nullptr)},
      {"manifest", std::move(manifest)},
  };
}

GenerationOutcome outcome_from_json(const nlohmann::json& doc) {
  try {
    GenerationOutcome outcome;
    outcome.edb_id = doc.at("edb_id").get<EdbId>();
    const auto status = doc.at("status").get<std::string>();
    if (status != "Success" && status != "Failure") throw Error(ErrorCode::MalformedDocument, "bad status " + status);
    outcome.status = status == "Success" ? GenerationOutcome::Status::Success : GenerationOutcome::Status::Failure;
    if (!doc.at("reason").is_null()) {
      outcome.reason = failure_reason_from_string(doc["reason"].get<std::string>());
      if (!outcome.reason) throw Error(ErrorCode::MalformedDocument, "unknown reason");
    }
    outcome.detail = doc.at("detail").get<std::string>();
    outcome.elapsed = Duration(doc.at("elapsed_ms").get<std::int64_t>());
    if (!doc.at("plan").is_null()) outcome.plan = plan_from_json(doc["plan"]);
    if (!doc.at("manifest").is_null()) {
      BundleManifest m;
      m.directory = doc["manifest"].at("directory").get<std::string>();
      for (const auto& f : doc["manifest"].at("files")) {
        m.files.push_back(BundleFile{f.at("path").get<std::string>(), f.at("sha256").get<std::string>(),
                                     f.at("size").get<std::uintmax_t>()});
      }
      outcome.manifest = std::move(m);
    }
    bool success = outcome.success();
    if (success != outcome.plan.has_value() || success == outcome.reason.has_value() ||
        success != outcome.manifest.has_value()) {
      throw Error(ErrorCode::MalformedDocument, "outcome must carry either a plan and manifest or a reason");
    }
    return outcome;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("outcome: ") + e.what());
  }
}

}  // namespace wpenv
