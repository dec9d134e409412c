#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wpenv/bootstrap.hpp"
#include "wpenv/corpus.hpp"
#include "wpenv/cpe.hpp"
#include "wpenv/iacgen.hpp"
#include "wpenv/resolvers.hpp"

namespace wpenv {

enum class Mode { EmitOnly, EmitAndBootstrap };

enum class FailureReason { UnparsableTitle, NoVulnerableApplication, NoImage, ErrorDuringSetup, UnknownVersion, FetchFailure };

std::string_view to_string(FailureReason reason) noexcept;
std::optional<FailureReason> failure_reason_from_string(std::string_view name) noexcept;

/// Lists tags once and serves the cached list afterwards. Thread-safe.
class CachingRegistry final : public RegistryClient {
 public:
  explicit CachingRegistry(std::shared_ptr<const RegistryClient> inner) : inner_(std::move(inner)) {}
  std::string repository() const override { return inner_->repository(); }
  std::vector<std::string> list_tags() const override;

 private:
  std::shared_ptr<const RegistryClient> inner_;
  mutable std::mutex mutex_;
  mutable std::optional<std::vector<std::string>> tags_;
};

struct Services {
  std::shared_ptr<const RegistryClient> registry;
  std::shared_ptr<const CpeDictionary> cpe;  // may be null
  SourceClients sources;
  GeneratorConfig config;
  std::filesystem::path out_dir = "out";
  /// Scratch space; `<out_dir>/.work` when empty.
  std::filesystem::path work_dir;
  /// Stamped into provenance.json. Inject a constant for reproducible bundles.
  std::function<std::chrono::system_clock::time_point()> wall_clock = [] { return std::chrono::system_clock::now(); };

  // Bootstrap mode only.
  std::shared_ptr<const StatusClient> probe_client;
  std::function<std::unique_ptr<Clock>()> make_clock = [] { return std::make_unique<SteadyClock>(); };
  std::shared_ptr<CommandExecutor> executor;

  std::filesystem::path scratch_dir() const { return work_dir.empty() ? out_dir / ".work" : work_dir; }
};

/// Clients backed by a fixtures directory:
///   registry_tags.json   JSON array of image tags (required)
///   cpe.json             CVE id -> CPE 2.3 strings (optional)
///   links.json           URL -> archive path relative to links.json (optional)
///   svn/plugins/<slug>/{tags/<version>,trunk}/...   (optional)
///   svn/themes/<slug>/{tags/<version>,trunk}/...    (optional)
/// Throws Error(MalformedDocument) when a present file does not parse.
Services offline_services(const std::filesystem::path& fixtures_dir, const std::filesystem::path& out_dir);

/// Docker Hub, NVD (key from NVD_API_KEY when set), the public extension
/// repositories, plain HTTP for software links, and the docker CLI.
Services live_services(const std::filesystem::path& out_dir);

struct GenerationOutcome {
  enum class Status { Success, Failure };

  EdbId edb_id = 0;
  Status status = Status::Failure;
  std::optional<FailureReason> reason;  // set iff Failure
  std::string detail;
  Duration elapsed{};
  std::optional<EnvironmentPlan> plan;      // set iff Success
  std::optional<BundleManifest> manifest;   // set iff Success

  bool success() const { return status == Status::Success; }
  friend bool operator==(const GenerationOutcome&, const GenerationOutcome&) = default;
};

/// Runs one exploit through title parsing, version resolution, image and
/// component lookup, bundle emission and (optionally) bootstrap. Never
/// throws for per-record failures; they come back as the outcome's reason.
GenerationOutcome generate(const ExploitRecord& record, const Services& services, Mode mode = Mode::EmitOnly);

/// One line of the outcomes file. Field names are documented in docs/outcomes.md.
nlohmann::json outcome_to_json(const GenerationOutcome& outcome);
/// Throws Error(MalformedDocument).
GenerationOutcome outcome_from_json(const nlohmann::json& doc);

}  // namespace wpenv
