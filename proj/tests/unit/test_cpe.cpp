#include "doctest.h"
#include "errors.hpp"
#include "http_server.hpp"
#include "support.hpp"
#include "wpenv/cpe.hpp"
#include "wpenv/error.hpp"

using namespace wpenv;
using testing::error_code_of;

namespace {

ExploitRecord record_with_poc(const std::string& poc) {
  ExploitRecord r;
  r.edb_id = 1;
  r.poc_text = poc;
  r.poc_header = parse_poc_header(poc);
  return r;
}

const char* kNvdBody = R"({
  "resultsPerPage": 1, "startIndex": 0, "totalResults": 1,
  "vulnerabilities": [{
    "cve": {
      "id": "CVE-2020-11738",
      "configurations": [{
        "nodes": [{
          "operator": "OR", "negate": false,
          "cpeMatch": [
            {"vulnerable": true, "criteria": "cpe:2.3:a:snapcreek:duplicator:1.3.26:*:*:*:*:wordpress:*:*"},
            {"vulnerable": true, "criteria": "cpe:2.3:a:snapcreek:duplicator:*:*:*:*:lite:wordpress:*:*",
             "versionEndExcluding": "1.3.28"}
          ]
        }]
      }]
    }
  }]
})";

}  // namespace

TEST_SUITE("cpe") {
  TEST_CASE("split_cpe23") {
    auto parts = split_cpe23("cpe:2.3:a:wordpress:wordpress:4.7:*:*:*:*:*:*:*");
    REQUIRE(parts);
    CHECK(parts->size() == 13);
    CHECK((*parts)[3] == "wordpress");
    CHECK((*parts)[5] == "4.7");

    auto escaped = split_cpe23("cpe:2.3:a:vendor:prod\\:uct:1.0:*:*:*:*:*:*:*");
    REQUIRE(escaped);
    CHECK((*escaped)[4] == "prod:uct");

    CHECK_FALSE(split_cpe23("cpe:/a:wordpress:wordpress:4.7"));
    CHECK_FALSE(split_cpe23("cpe:2.3:a:wordpress:wordpress:4.7"));
    CHECK_FALSE(split_cpe23(""));
  }

  TEST_CASE("fixture dictionary and version extraction") {
    FixtureCpeDictionary dict({{"CVE-2017-5487",
                                {"cpe:2.3:a:wordpress:wordpress:4.7:*:*:*:*:*:*:*",
                                 "cpe:2.3:a:wordpress:wordpress:*:*:*:*:*:*:*:*",
                                 "cpe:2.3:a:wordpress:wordpress:-:*:*:*:*:*:*:*", "garbage"}}});
    auto entries = resolve_versions_from_cve("CVE-2017-5487", dict);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].vendor == "wordpress");
    CHECK(entries[0].product == "wordpress");
    CHECK(entries[0].version == parse_version("4.7"));
    CHECK(error_code_of([&] { resolve_versions_from_cve("CVE-1999-0001", dict); }) == ErrorCode::UnknownCve);
  }

  TEST_CASE("fixture dictionary from file") {
    auto dict = FixtureCpeDictionary::from_file(testing::e2e_fixtures() / "cpe.json");
    CHECK(dict.lookup("CVE-2020-11738").size() == 1);
    testing::TempDir dir;
    testing::write_file(dir / "bad.json", "[1,2]");
    CHECK(error_code_of([&] { FixtureCpeDictionary::from_file(dir / "bad.json"); }) == ErrorCode::MalformedDocument);
    CHECK(error_code_of([&] { FixtureCpeDictionary::from_file(dir / "missing.json"); }) == ErrorCode::MalformedDocument);
  }

  TEST_CASE("NVD response parsing") {
    auto criteria = NvdCpeDictionary::parse_response(kNvdBody);
    CHECK(criteria.size() == 2);
    CHECK(error_code_of([] { NvdCpeDictionary::parse_response("not json"); }) == ErrorCode::DictionaryUnavailable);
    CHECK(NvdCpeDictionary::parse_response(R"({"vulnerabilities": []})").empty());
  }

  TEST_CASE("NVD client against a loopback server") {
    testing::LocalServer local;
    std::string seen_key;
    local.server().Get("/rest/json/cves/2.0", [&](const httplib::Request& req, httplib::Response& res) {
      seen_key = req.get_header_value("apiKey");
      auto id = req.get_param_value("cveId");
      if (id == "CVE-2020-11738") {
        res.set_content(kNvdBody, "application/json");
      } else if (id == "CVE-0000-0000") {
        res.status = 503;
      } else {
        res.set_content(R"({"totalResults": 0, "vulnerabilities": []})", "application/json");
      }
    });
    local.start();

    NvdCpeDictionary dict(local.base_url(), "secret");
    auto entries = resolve_versions_from_cve("CVE-2020-11738", dict);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].product == "duplicator");
    CHECK(entries[0].version == parse_version("1.3.26"));
    CHECK(seen_key == "secret");
    CHECK(error_code_of([&] { dict.lookup("CVE-2099-1"); }) == ErrorCode::UnknownCve);
    CHECK(error_code_of([&] { dict.lookup("CVE-0000-0000"); }) == ErrorCode::DictionaryUnavailable);

    NvdCpeDictionary unreachable("http://127.0.0.1:1");
    CHECK(error_code_of([&] { unreachable.lookup("CVE-2020-11738"); }) == ErrorCode::DictionaryUnavailable);
  }

  TEST_CASE("version from the PoC header") {
    auto c = extract_version_from_poc(record_with_poc("# Exploit Title: X\n# Version: 4.6\n"));
    REQUIRE(c);
    CHECK(c->render() == "4.6");
    auto v = extract_version_from_poc(record_with_poc("# Version: v2.9.32\n"));
    REQUIRE(v);
    CHECK(v->front() == parse_version("2.9.32"));
  }

  TEST_CASE("version from free text") {
    auto c = extract_version_from_poc(record_with_poc("# Affected Version: <= 2.0.1\n"));
    REQUIRE(c);
    CHECK(c->kind() == VersionConstraint::Kind::UpperBoundInclusive);
    CHECK(c->render() == "<= 2.0.1");

    auto d = extract_version_from_poc(record_with_poc("Vulnerable plugin version 1.3.26 and below\n"));
    REQUIRE(d);
    CHECK(d->render() == "1.3.26");

    auto header_unparsable = extract_version_from_poc(
        record_with_poc("# Version: all of them\nThe plugin version: 3.2 is affected\n"));
    REQUIRE(header_unparsable);
    CHECK(header_unparsable->render() == "3.2");
  }

  TEST_CASE("no version in the PoC") {
    CHECK_FALSE(extract_version_from_poc(record_with_poc("")));
    CHECK_FALSE(extract_version_from_poc(record_with_poc("# Tested on: WordPress version 5.0\n")));
    CHECK_FALSE(extract_version_from_poc(record_with_poc("$versions = 3.1;\nsubversion 1.4\n")));
    std::string late(70, '\n');
    late += "Version: 1.0\n";
    CHECK_FALSE(extract_version_from_poc(record_with_poc(late)));
  }
}
