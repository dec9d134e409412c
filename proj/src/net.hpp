#pragma once

// Minimal HTTP(S) GET used by the live clients. Keeps httplib out of every
// other translation unit.

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wpenv::net {

struct Response {
  int status = 0;
  std::string body;
};

struct GetOptions {
  std::chrono::milliseconds timeout{std::chrono::seconds(30)};
  bool follow_redirects = true;
  std::vector<std::pair<std::string, std::string>> headers;
};

/// Returns nullopt on transport failure (DNS, connect, TLS, malformed URL).
std::optional<Response> get(std::string_view url, const GetOptions& options = {});

struct UrlParts {
  std::string scheme_host_port;  // "https://example.com:8443"
  std::string path;              // "/a/b?c=d", at least "/"
};

std::optional<UrlParts> split_url(std::string_view url);

/// Percent-encodes everything outside the RFC 3986 unreserved set.
std::string url_encode(std::string_view s);

}  // namespace wpenv::net
