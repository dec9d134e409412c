#pragma once

#include <filesystem>
#include <string_view>

namespace wpenv {

/// Extracts a zip archive (stored or deflated members) into `dest`. When every
/// member lives under one top-level directory, that directory is stripped so
/// the contents land directly in `dest`. Returns the number of files written.
/// Throws Error(MalformedDocument) for corrupt archives, unsupported methods,
/// CRC mismatches and members that would escape `dest`.
std::size_t extract_zip(std::string_view archive_bytes, const std::filesystem::path& dest);
std::size_t extract_zip_file(const std::filesystem::path& archive, const std::filesystem::path& dest);

}  // namespace wpenv
