#include "wpenv/bootstrap.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <thread>

#include "net.hpp"
#include "wpenv/error.hpp"

extern char** environ;

namespace wpenv {

void ReadinessProbe::validate() const {
  if (url.empty()) throw Error(ErrorCode::InvalidArgument, "probe url is empty");
  if (interval <= Duration::zero()) throw Error(ErrorCode::InvalidArgument, "probe interval must be positive");
  if (timeout < interval) throw Error(ErrorCode::InvalidArgument, "probe timeout must be at least the interval");
}

ReadinessProbe ReadinessProbe::for_site(const SiteSpec& site, Duration interval, Duration timeout) {
  return ReadinessProbe{site.url() + "/wp-admin/index.php", interval, timeout, 200};
}

Duration SteadyClock::now() {
  return std::chrono::duration_cast<Duration>(std::chrono::steady_clock::now().time_since_epoch());
}

void SteadyClock::sleep_until(Duration t) {
  std::this_thread::sleep_until(std::chrono::steady_clock::time_point(t));
}

Duration SimulatedClock::now() {
  std::lock_guard lock(mutex_);
  return now_;
}

void SimulatedClock::sleep_until(Duration t) {
  std::lock_guard lock(mutex_);
  if (t > now_) now_ = t;
}

std::optional<int> HttpStatusClient::get_status(const std::string& url) const {
  net::GetOptions options;
  options.timeout = request_timeout_;
  options.follow_redirects = true;
  auto response = net::get(url, options);
  if (!response) return std::nullopt;
  return response->status;
}

ReadyResult wait_ready(const ReadinessProbe& probe, const StatusClient& http, Clock& clock) {
  probe.validate();
  const Duration start = clock.now();
  const Duration deadline = start + probe.timeout;
  ReadyResult result;
  for (std::int64_t k = 0;; ++k) {
    Duration slot = start + k * probe.interval;
    if (slot > deadline) break;
    // A slow probe may overrun later slots; skip them rather than bunching up.
    if (Duration now = clock.now(); now > slot) {
      k = (now - start + probe.interval - Duration(1)) / probe.interval;
      slot = start + k * probe.interval;
      if (slot > deadline) break;
    }
    clock.sleep_until(slot);
    ++result.probes;
    auto status = http.get_status(probe.url);
    if (status && *status == probe.success_status) {
      result.elapsed = clock.now() - start;
      return result;
    }
  }
  clock.sleep_until(deadline);
  throw Error(ErrorCode::BootstrapTimeout, probe.url + " not ready after " +
                                               std::to_string(probe.timeout.count()) + " ms (" +
                                               std::to_string(result.probes) + " probes)");
}

CommandResult run_process(const std::vector<std::string>& argv) {
  if (argv.empty()) throw Error(ErrorCode::InvalidArgument, "empty command");
  int fds[2];
  if (pipe2(fds, O_CLOEXEC) != 0) return {127, "pipe failed"};

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDERR_FILENO);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_t pid = 0;
  int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(fds[1]);
  if (rc != 0) {
    close(fds[0]);
    return {127, argv[0] + ": cannot start (errno " + std::to_string(rc) + ")"};
  }

  CommandResult result;
  std::array<char, 4096> buf;
  for (;;) {
    ssize_t n = read(fds[0], buf.data(), buf.size());
    if (n > 0) {
      result.output.append(buf.data(), static_cast<std::size_t>(n));
    } else if (n == 0 || errno != EINTR) {
      break;
    }
  }
  close(fds[0]);

  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.exit_status = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  return result;
}

CommandResult ProcessExecutor::run(const std::string& container, const std::vector<std::string>& argv) {
  std::vector<std::string> full{runtime_, "exec", container};
  full.insert(full.end(), argv.begin(), argv.end());
  return run_process(full);
}

CommandResult ProcessExecutor::start_stack(const std::filesystem::path& bundle_dir) {
  return run_process({runtime_, "compose", "-f", (bundle_dir / "docker-compose.yml").string(), "up", "-d", "--build"});
}

bool SetupReport::success() const {
  return std::all_of(steps.begin(), steps.end(), [](const StepResult& s) { return s.ok(); });
}

std::optional<SetupStep> SetupReport::failed_step() const {
  for (const auto& s : steps) {
    if (!s.ok()) return s.step;
  }
  return std::nullopt;
}

SetupReport run_setup(const EnvironmentPlan& plan, CommandExecutor& executor) {
  SetupReport report;
  for (const auto& step : plan.setup_steps) {
    report.steps.push_back({step, executor.run(plan.app_container(), step_argv(plan, step))});
    if (!report.steps.back().ok()) break;
  }
  return report;
}

void require_success(const SetupReport& report) {
  for (const auto& s : report.steps) {
    if (!s.ok()) {
      throw Error(ErrorCode::SetupStepFailed, s.step.label() + " exited " + std::to_string(s.result.exit_status) +
                                                  (s.result.output.empty() ? "" : ": " + s.result.output));
    }
  }
}

}  // namespace wpenv
