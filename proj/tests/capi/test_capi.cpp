#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <memory>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "wpenv/wpenv.h"

namespace fs = std::filesystem;

namespace {

const fs::path kE2e = fs::path(WPENV_FIXTURES_DIR) / "e2e";

struct CorpusDeleter {
  void operator()(wpenv_corpus* c) const { wpenv_corpus_free(c); }
};
struct ServicesDeleter {
  void operator()(wpenv_services* s) const { wpenv_services_free(s); }
};
using CorpusPtr = std::unique_ptr<wpenv_corpus, CorpusDeleter>;
using ServicesPtr = std::unique_ptr<wpenv_services, ServicesDeleter>;

std::string take(char* s) {
  std::string out = s ? s : "";
  wpenv_string_free(s);
  return out;
}

CorpusPtr load_wordpress() {
  wpenv_corpus* all = nullptr;
  REQUIRE(wpenv_corpus_load((kE2e / "corpus").c_str(), &all) == WPENV_OK);
  CorpusPtr owner(all);
  wpenv_corpus* wp = nullptr;
  REQUIRE(wpenv_corpus_select_wordpress(all, &wp) == WPENV_OK);
  return CorpusPtr(wp);
}

struct TempOut {
  fs::path path = fs::temp_directory_path() / ("wpenv-capi-" + std::to_string(::getpid()));
  ~TempOut() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

ServicesPtr offline(const fs::path& out) {
  wpenv_services* s = nullptr;
  REQUIRE(wpenv_services_create_offline((kE2e / "fixtures").c_str(), out.c_str(), &s) == WPENV_OK);
  REQUIRE(wpenv_services_set_fixed_time(s, 1620000000) == WPENV_OK);
  return ServicesPtr(s);
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(wpenv_version()).size() > 0);
  CHECK(std::string(wpenv_status_name(WPENV_OK)) == "OK");
  CHECK(std::string(wpenv_status_name(WPENV_E_NO_IMAGE)) == "NoImage");
  CHECK(std::string(wpenv_status_name(WPENV_E_MALFORMED_DOCUMENT)) == "MalformedDocument");
  CHECK(std::string(wpenv_status_name(static_cast<wpenv_status>(1234))) == "Unknown");
}

TEST_CASE("errors are reported through status codes") {
  wpenv_corpus* c = nullptr;
  CHECK(wpenv_corpus_load("/no/such/dir", &c) == WPENV_E_INDEX_UNREADABLE);
  CHECK(c == nullptr);
  CHECK(std::string(wpenv_last_error()).find("IndexUnreadable") != std::string::npos);
  CHECK(wpenv_corpus_load(nullptr, &c) == WPENV_E_INVALID_ARGUMENT);
  char* out = nullptr;
  CHECK(wpenv_parse_title(nullptr, &out) == WPENV_E_INVALID_ARGUMENT);
  CHECK(wpenv_parse_title("WordPress Plugin X 1.0 - XSS", &out) == WPENV_OK);
  CHECK(std::string(wpenv_last_error()).empty());
  take(out);
  wpenv_services* s = nullptr;
  CHECK(wpenv_services_create_offline("/no/such/fixtures", "/tmp/x", &s) == WPENV_E_MALFORMED_DOCUMENT);
  wpenv_corpus_free(nullptr);
  wpenv_services_free(nullptr);
  wpenv_string_free(nullptr);
}

TEST_CASE("title parsing") {
  char* out = nullptr;
  REQUIRE(wpenv_parse_title("WordPress Plugin Social Warfare < 3.5.3 - Remote Code Execution", &out) == WPENV_OK);
  auto doc = nlohmann::json::parse(take(out));
  CHECK(doc["category"] == "Plugin");
  CHECK(doc["product"] == "Social Warfare");
  CHECK(doc["version"] == "< 3.5.3");
  CHECK(doc["attack_type"] == "Remote Code Execution");
}

TEST_CASE("corpus handles") {
  auto wp = load_wordpress();
  CHECK(wpenv_corpus_size(wp.get()) == 20);
  char* warnings = nullptr;
  REQUIRE(wpenv_corpus_warnings(wp.get(), &warnings) == WPENV_OK);
  CHECK(nlohmann::json::parse(take(warnings)).is_array());

  char* counts = nullptr;
  REQUIRE(wpenv_classify(wp.get(), &counts) == WPENV_OK);
  auto doc = nlohmann::json::parse(take(counts));
  std::size_t total = 0;
  for (const auto& [k, v] : doc.items()) total += v.get<std::size_t>();
  CHECK(total == 20);
}

TEST_CASE("generate, batch and stats") {
  TempOut tmp;
  auto wp = load_wordpress();
  auto services = offline(tmp.path);

  int success = -1;
  char* json = nullptr;
  REQUIRE(wpenv_generate(wp.get(), services.get(), 1001, WPENV_MODE_EMIT, &success, &json) == WPENV_OK);
  CHECK(success == 1);
  auto outcome = nlohmann::json::parse(take(json));
  CHECK(outcome["status"] == "Success");
  CHECK(fs::exists(tmp.path / "1001" / "Dockerfile"));

  REQUIRE(wpenv_generate(wp.get(), services.get(), 1016, WPENV_MODE_EMIT, &success, &json) == WPENV_OK);
  CHECK(success == 0);
  CHECK(nlohmann::json::parse(take(json))["reason"] == "UnparsableTitle");

  CHECK(wpenv_generate(wp.get(), services.get(), 42, WPENV_MODE_EMIT, &success, &json) == WPENV_E_UNKNOWN_RECORD);

  REQUIRE(wpenv_services_set_config_json(services.get(), R"({"site": {"http_port": 9090}})") == WPENV_OK);
  CHECK(wpenv_services_set_config_json(services.get(), R"({"nope": 1})") == WPENV_E_MALFORMED_DOCUMENT);
  CHECK(wpenv_services_set_config_json(services.get(), "{") == WPENV_E_MALFORMED_DOCUMENT);

  char* ndjson = nullptr;
  REQUIRE(wpenv_batch(wp.get(), services.get(), WPENV_MODE_EMIT, 4, &ndjson) == WPENV_OK);
  std::string lines = take(ndjson);
  CHECK(std::count(lines.begin(), lines.end(), '\n') == 20);
  CHECK(nlohmann::json::parse(lines.substr(0, lines.find('\n')))["plan"]["site"]["http_port"] == 9090);

  char* report = nullptr;
  REQUIRE(wpenv_stats(wp.get(), lines.c_str(), 1, &report) == WPENV_OK);
  auto stats = nlohmann::json::parse(take(report));
  CHECK(stats["total"] == 20);
  CHECK(stats["successes"] == 14);
  REQUIRE(wpenv_stats(wp.get(), lines.c_str(), 0, &report) == WPENV_OK);
  CHECK(take(report).find("Generated 14 of 20") != std::string::npos);
  CHECK(wpenv_stats(wp.get(), "not json\n", 0, &report) == WPENV_E_MALFORMED_DOCUMENT);
}
