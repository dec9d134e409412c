#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "net.hpp"

#include <cctype>

namespace wpenv::net {

std::optional<UrlParts> split_url(std::string_view url) {
  std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) return std::nullopt;
  std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") return std::nullopt;
  std::size_t host_start = scheme_end + 3;
  std::size_t path_start = url.find('/', host_start);
  std::string_view host = url.substr(host_start, path_start == std::string_view::npos ? std::string_view::npos
                                                                                       : path_start - host_start);
  if (host.empty()) return std::nullopt;
  UrlParts parts;
  parts.scheme_host_port = std::string(url.substr(0, host_start)) + std::string(host);
  parts.path = path_start == std::string_view::npos ? "/" : std::string(url.substr(path_start));
  return parts;
}

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    }
  }
  return out;
}

std::optional<Response> get(std::string_view url, const GetOptions& options) {
  auto parts = split_url(url);
  if (!parts) return std::nullopt;
  try {
    httplib::Client client(parts->scheme_host_port);
    auto seconds = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
    auto micros = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_follow_location(options.follow_redirects);
    httplib::Headers headers;
    for (const auto& [k, v] : options.headers) headers.emplace(k, v);
    auto result = client.Get(parts->path, headers);
    if (!result) return std::nullopt;
    return Response{result->status, result->body};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace wpenv::net
