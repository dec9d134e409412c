#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wpenv {

enum class ErrorCode {
  InvalidArgument,
  IndexUnreadable,
  DuplicateId,
  UnparsableVersion,
  DictionaryUnavailable,
  UnknownCve,
  RegistryUnavailable,
  NoImage,
  EmptySlug,
  NoVulnerableApplication,
  WriteFailure,
  BootstrapTimeout,
  SetupStepFailed,
  UnknownRecord,
  MalformedDocument,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wpenv
