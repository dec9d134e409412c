#include "wpenv/error.hpp"

namespace wpenv {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IndexUnreadable: return "IndexUnreadable";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnparsableVersion: return "UnparsableVersion";
    case ErrorCode::DictionaryUnavailable: return "DictionaryUnavailable";
    case ErrorCode::UnknownCve: return "UnknownCve";
    case ErrorCode::RegistryUnavailable: return "RegistryUnavailable";
    case ErrorCode::NoImage: return "NoImage";
    case ErrorCode::EmptySlug: return "EmptySlug";
    case ErrorCode::NoVulnerableApplication: return "NoVulnerableApplication";
    case ErrorCode::WriteFailure: return "WriteFailure";
    case ErrorCode::BootstrapTimeout: return "BootstrapTimeout";
    case ErrorCode::SetupStepFailed: return "SetupStepFailed";
    case ErrorCode::UnknownRecord: return "UnknownRecord";
    case ErrorCode::MalformedDocument: return "MalformedDocument";
  }
  return "Unknown";
}

}  // namespace wpenv
