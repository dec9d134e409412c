#include "wpenv/zip.hpp"

#include <zlib.h>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wpenv/error.hpp"

namespace wpenv {

namespace fs = std::filesystem;

namespace {

constexpr std::uint32_t kEndOfCentralDir = 0x06054b50;
constexpr std::uint32_t kCentralHeader = 0x02014b50;
constexpr std::uint32_t kLocalHeader = 0x04034b50;

[[noreturn]] void corrupt(const std::string& why) { throw Error(ErrorCode::MalformedDocument, "zip: " + why); }

struct Reader {
  std::string_view data;

  std::uint16_t u16(std::size_t at) const {
    if (at + 2 > data.size()) corrupt("truncated");
    return static_cast<std::uint16_t>(static_cast<unsigned char>(data[at]) |
                                      (static_cast<unsigned char>(data[at + 1]) << 8));
  }
  std::uint32_t u32(std::size_t at) const {
    return static_cast<std::uint32_t>(u16(at)) | (static_cast<std::uint32_t>(u16(at + 2)) << 16);
  }
  std::string_view bytes(std::size_t at, std::size_t n) const {
    if (at > data.size() || n > data.size() - at) corrupt("truncated");
    return data.substr(at, n);
  }
};

struct Member {
  std::string name;
  std::uint16_t method = 0;
  std::uint32_t crc = 0;
  std::uint32_t compressed_size = 0;
  std::uint32_t size = 0;
  std::uint32_t local_offset = 0;
};

std::string inflate_raw(std::string_view input, std::uint32_t expected_size) {
  std::string out(expected_size, '\0');
  z_stream stream{};
  if (inflateInit2(&stream, -MAX_WBITS) != Z_OK) corrupt("inflate init failed");
  stream.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(input.data()));
  stream.avail_in = static_cast<uInt>(input.size());
  stream.next_out = reinterpret_cast<Bytef*>(out.data());
  stream.avail_out = static_cast<uInt>(out.size());
  int rc = inflate(&stream, Z_FINISH);
  inflateEnd(&stream);
  if (rc != Z_STREAM_END || stream.total_out != expected_size) corrupt("deflate stream damaged");
  return out;
}

// Rejects absolute paths and any `..` component.
std::optional<fs::path> safe_relative(const std::string& name) {
  if (name.empty() || name.front() == '/' || name.find('\\') != std::string::npos) return std::nullopt;
  fs::path p(name);
  if (p.has_root_name() || p.has_root_directory()) return std::nullopt;
  for (const auto& part : p) {
    if (part == "..") return std::nullopt;
  }
  return p.lexically_normal();
}

}  // namespace

std::size_t extract_zip(std::string_view archive_bytes, const fs::path& dest) {
  Reader r{archive_bytes};
  if (archive_bytes.size() < 22) corrupt("too small");

  std::size_t eocd = std::string_view::npos;
  std::size_t lowest = archive_bytes.size() > 22 + 0xFFFF ? archive_bytes.size() - 22 - 0xFFFF : 0;
  for (std::size_t at = archive_bytes.size() - 22;; --at) {
    if (r.u32(at) == kEndOfCentralDir) {
      eocd = at;
      break;
    }
    if (at == lowest) break;
  }
  if (eocd == std::string_view::npos) corrupt("no end of central directory");

  std::uint16_t count = r.u16(eocd + 10);
  std::uint32_t dir_offset = r.u32(eocd + 16);
  if (count == 0xFFFF || dir_offset == 0xFFFFFFFF) corrupt("zip64 archives are not supported");

  std::vector<Member> members;
  std::size_t at = dir_offset;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (r.u32(at) != kCentralHeader) corrupt("bad central directory entry");
    Member m;
    std::uint16_t flags = r.u16(at + 8);
    if (flags & 0x1) corrupt("encrypted members are not supported");
    m.method = r.u16(at + 10);
    m.crc = r.u32(at + 16);
    m.compressed_size = r.u32(at + 20);
    m.size = r.u32(at + 24);
    std::uint16_t name_len = r.u16(at + 28);
    std::uint16_t extra_len = r.u16(at + 30);
    std::uint16_t comment_len = r.u16(at + 32);
    m.local_offset = r.u32(at + 42);
    m.name = std::string(r.bytes(at + 46, name_len));
    at += 46 + name_len + extra_len + comment_len;
    members.push_back(std::move(m));
  }

  // Common single top-level directory ("plugin-slug/...") is dropped.
  std::optional<std::string> common_root;
  bool single_root = !members.empty();
  for (const auto& m : members) {
    std::size_t slash = m.name.find('/');
    if (slash == std::string::npos) {
      single_root = false;
      break;
    }
    std::string root = m.name.substr(0, slash);
    if (!common_root) common_root = root;
    if (*common_root != root) {
      single_root = false;
      break;
    }
  }

  std::size_t written = 0;
  for (const auto& m : members) {
    std::string name = m.name;
    if (single_root) name = name.substr(common_root->size() + 1);
    if (name.empty()) continue;
    auto rel = safe_relative(name);
    if (!rel) corrupt("member escapes destination: " + m.name);
    fs::path target = dest / *rel;
    if (name.back() == '/') {
      fs::create_directories(target);
      continue;
    }

    if (r.u32(m.local_offset) != kLocalHeader) corrupt("bad local header for " + m.name);
    std::uint16_t local_name_len = r.u16(m.local_offset + 26);
    std::uint16_t local_extra_len = r.u16(m.local_offset + 28);
    std::string_view raw = r.bytes(m.local_offset + 30 + local_name_len + local_extra_len, m.compressed_size);

    std::string content;
    if (m.method == 0) {
      if (m.compressed_size != m.size) corrupt("stored size mismatch for " + m.name);
      content = std::string(raw);
    } else if (m.method == 8) {
      content = inflate_raw(raw, m.size);
    } else {
      corrupt("unsupported compression method " + std::to_string(m.method));
    }
    auto crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(content.data()), static_cast<uInt>(content.size())));
    if (crc != m.crc) corrupt("CRC mismatch for " + m.name);

    fs::create_directories(target.parent_path());
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::WriteFailure, target.string());
    ++written;
  }
  return written;
}

std::size_t extract_zip_file(const fs::path& archive, const fs::path& dest) {
  std::ifstream in(archive, std::ios::binary);
  if (!in) corrupt("cannot read " + archive.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return extract_zip(buffer.str(), dest);
}

}  // namespace wpenv
