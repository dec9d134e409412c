#pragma once

#include <chrono>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "wpenv/iacgen.hpp"

namespace wpenv {

using Duration = std::chrono::milliseconds;

struct ReadinessProbe {
  std::string url;
  Duration interval{std::chrono::seconds(10)};
  Duration timeout{std::chrono::seconds(300)};
  int success_status = 200;

  /// Throws Error(InvalidArgument) unless interval > 0 and timeout >= interval.
  void validate() const;

  /// `http://<host>:<port>/wp-admin/index.php` for the plan's site.
  static ReadinessProbe for_site(const SiteSpec& site, Duration interval, Duration timeout);
};

/// Monotonic time source measured from an arbitrary origin.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Duration now() = 0;
  virtual void sleep_until(Duration t) = 0;
};

class SteadyClock final : public Clock {
 public:
  Duration now() override;
  void sleep_until(Duration t) override;
};

/// Time only moves when someone sleeps.
class SimulatedClock final : public Clock {
 public:
  explicit SimulatedClock(Duration start = Duration::zero()) : now_(start) {}
  Duration now() override;
  void sleep_until(Duration t) override;

 private:
  std::mutex mutex_;
  Duration now_;
};

class StatusClient {
 public:
  virtual ~StatusClient() = default;
  /// HTTP status of a GET, nullopt on transport failure.
  virtual std::optional<int> get_status(const std::string& url) const = 0;
};

/// Follows redirects, so a setup page behind a 302 still reads as 200.
class HttpStatusClient final : public StatusClient {
 public:
  explicit HttpStatusClient(Duration request_timeout = std::chrono::seconds(5)) : request_timeout_(request_timeout) {}
  std::optional<int> get_status(const std::string& url) const override;

 private:
  Duration request_timeout_;
};

struct ReadyResult {
  Duration elapsed{};
  int probes = 0;
};

/// Probes at t=0 and then every interval until success_status arrives.
/// Throws Error(BootstrapTimeout) after sleeping to exactly `timeout`.
ReadyResult wait_ready(const ReadinessProbe& probe, const StatusClient& http, Clock& clock);

struct CommandResult {
  int exit_status = 0;
  std::string output;
};

class CommandExecutor {
 public:
  virtual ~CommandExecutor() = default;
  /// Runs argv inside the named container.
  virtual CommandResult run(const std::string& container, const std::vector<std::string>& argv) = 0;
  /// Builds and starts the stack described by `<bundle_dir>/docker-compose.yml`.
  virtual CommandResult start_stack(const std::filesystem::path& bundle_dir) = 0;
};

/// Shells out to the container runtime (`docker exec`, `docker compose up`).
class ProcessExecutor final : public CommandExecutor {
 public:
  explicit ProcessExecutor(std::string runtime = "docker") : runtime_(std::move(runtime)) {}
  CommandResult run(const std::string& container, const std::vector<std::string>& argv) override;
  CommandResult start_stack(const std::filesystem::path& bundle_dir) override;

 private:
  std::string runtime_;
};

/// Runs argv on the host with stdout and stderr captured together.
/// Exit status 127 when the program cannot be started.
CommandResult run_process(const std::vector<std::string>& argv);

struct StepResult {
  SetupStep step;
  CommandResult result;

  bool ok() const { return result.exit_status == 0; }
};

struct SetupReport {
  std::vector<StepResult> steps;  // attempted steps, in order

  bool success() const;
  std::optional<SetupStep> failed_step() const;
};

/// Executes setup_steps in order and stops at the first non-zero exit.
/// Step failures are reported, not thrown; see require_success.
SetupReport run_setup(const EnvironmentPlan& plan, CommandExecutor& executor);

/// Throws Error(SetupStepFailed) naming the failed step.
void require_success(const SetupReport& report);

}  // namespace wpenv
