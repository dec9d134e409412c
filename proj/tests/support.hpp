#pragma once

// Helpers shared by the unit and acceptance tests.

#include <zlib.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace testing {

namespace fs = std::filesystem;

inline fs::path fixtures() { return WPENV_FIXTURES_DIR; }
inline fs::path e2e_corpus() { return fixtures() / "e2e" / "corpus"; }
inline fs::path e2e_fixtures() { return fixtures() / "e2e" / "fixtures"; }

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("wpenv-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const fs::path& p) const { return path_ / p; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& path, std::string_view content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

/// Every regular file below `dir` as relative path -> bytes.
inline std::vector<std::pair<std::string, std::string>> snapshot_tree(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.emplace_back(e.path().lexically_relative(dir).generic_string(), read_file(e.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct ZipMember {
  std::string name;
  std::string data;
  bool deflate = false;
};

namespace detail {

inline void put16(std::string& s, std::uint16_t v) {
  s += static_cast<char>(v & 0xFF);
  s += static_cast<char>(v >> 8);
}
inline void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s += static_cast<char>((v >> (8 * i)) & 0xFF);
}

inline std::string raw_deflate(std::string_view data) {
  z_stream zs{};
  deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY);
  std::string out(deflateBound(&zs, static_cast<uLong>(data.size())), '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  return out;
}

}  // namespace detail

/// Minimal zip writer for building test archives in memory.
/// `corrupt_crc` stores a wrong checksum for every member.
inline std::string make_zip(const std::vector<ZipMember>& members, bool corrupt_crc = false) {
  std::string body, central;
  for (const auto& m : members) {
    std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0, reinterpret_cast<const Bytef*>(m.data.data()), static_cast<uInt>(m.data.size())));
    if (corrupt_crc) crc ^= 0xDEADBEEF;
    std::string payload = m.deflate ? detail::raw_deflate(m.data) : m.data;
    std::uint16_t method = m.deflate ? 8 : 0;
    auto offset = static_cast<std::uint32_t>(body.size());

    detail::put32(body, 0x04034b50);
    detail::put16(body, 20);
    detail::put16(body, 0);
    detail::put16(body, method);
    detail::put16(body, 0);
    detail::put16(body, 0x21);
    detail::put32(body, crc);
    detail::put32(body, static_cast<std::uint32_t>(payload.size()));
    detail::put32(body, static_cast<std::uint32_t>(m.data.size()));
    detail::put16(body, static_cast<std::uint16_t>(m.name.size()));
    detail::put16(body, 0);
    body += m.name;
    body += payload;

    detail::put32(central, 0x02014b50);
    detail::put16(central, 20);
    detail::put16(central, 20);
    detail::put16(central, 0);
    detail::put16(central, method);
    detail::put16(central, 0);
    detail::put16(central, 0x21);
    detail::put32(central, crc);
    detail::put32(central, static_cast<std::uint32_t>(payload.size()));
    detail::put32(central, static_cast<std::uint32_t>(m.data.size()));
    detail::put16(central, static_cast<std::uint16_t>(m.name.size()));
    detail::put16(central, 0);
    detail::put16(central, 0);
    detail::put16(central, 0);
    detail::put16(central, 0);
    detail::put32(central, 0);
    detail::put32(central, offset);
    central += m.name;
  }
  std::string out = body + central;
  detail::put32(out, 0x06054b50);
  detail::put16(out, 0);
  detail::put16(out, 0);
  detail::put16(out, static_cast<std::uint16_t>(members.size()));
  detail::put16(out, static_cast<std::uint16_t>(members.size()));
  detail::put32(out, static_cast<std::uint32_t>(central.size()));
  detail::put32(out, static_cast<std::uint32_t>(body.size()));
  detail::put16(out, 0);
  return out;
}

}  // namespace testing
