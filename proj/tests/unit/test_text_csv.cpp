#include "csv.hpp"
#include "doctest.h"
#include "text.hpp"

using namespace wpenv;

TEST_SUITE("text") {
  TEST_CASE("trim and case helpers") {
    CHECK(text::trim("  a b \t\n") == "a b");
    CHECK(text::trim("   ").empty());
    CHECK(text::to_lower("WordPress") == "wordpress");
    CHECK(text::iequals("PLUGIN", "plugin"));
    CHECK_FALSE(text::iequals("plugin", "plugins"));
    CHECK(text::istarts_with("WORDPRESS Core", "wordpress"));
    CHECK(text::iends_with("archive.ZIP", ".zip"));
  }

  TEST_CASE("splitting") {
    CHECK(text::split("a,,b", ',') == std::vector<std::string_view>{"a", "", "b"});
    CHECK(text::split("", ',') == std::vector<std::string_view>{""});
    CHECK(text::split_whitespace("  a \t b\nc  ") == std::vector<std::string_view>{"a", "b", "c"});
    CHECK(text::split_lines("a\r\nb\n\nc") == std::vector<std::string_view>{"a", "b", "", "c"});
    CHECK(text::split_lines("").empty());
  }

  TEST_CASE("collapse_whitespace and join") {
    CHECK(text::collapse_whitespace("  WordPress   Plugin\tX  ") == "WordPress Plugin X");
    CHECK(text::join({"a", "b", "c"}, "/") == "a/b/c");
    CHECK(text::join({}, "/").empty());
  }

  TEST_CASE("sanitize_utf8 keeps valid text and replaces broken bytes") {
    CHECK(text::sanitize_utf8("caf\xc3\xa9") == "caf\xc3\xa9");
    CHECK(text::sanitize_utf8("a\xff" "b") == "a\xef\xbf\xbd" "b");
    CHECK(text::sanitize_utf8("\xc3") == "\xef\xbf\xbd");
    // overlong encoding of '/'
    CHECK(text::sanitize_utf8("\xc0\xaf").find('/') == std::string::npos);
  }

  TEST_CASE("shell_quote") {
    CHECK(text::shell_quote("--path=/var/www/html") == "--path=/var/www/html");
    CHECK(text::shell_quote("Vulnerable WordPress") == "'Vulnerable WordPress'");
    CHECK(text::shell_quote("it's") == "'it'\\''s'");
    CHECK(text::shell_quote("") == "''");
  }
}

TEST_SUITE("csv") {
  TEST_CASE("plain rows") {
    auto t = csv::parse("id,title\n1,a\n2,b\n");
    REQUIRE(t);
    CHECK(t->header == csv::Row{"id", "title"});
    REQUIRE(t->rows.size() == 2);
    CHECK(t->rows[1] == csv::Row{"2", "b"});
    CHECK(t->row_lines == std::vector<std::size_t>{2, 3});
  }

  TEST_CASE("quoted fields with commas, quotes and newlines") {
    auto t = csv::parse("a,b\n\"x, y\",\"say \"\"hi\"\"\"\n\"multi\nline\",z\n3,4");
    REQUIRE(t);
    REQUIRE(t->rows.size() == 3);
    CHECK(t->rows[0] == csv::Row{"x, y", "say \"hi\""});
    CHECK(t->rows[1] == csv::Row{"multi\nline", "z"});
    CHECK(t->row_lines[2] == 5);
  }

  TEST_CASE("CRLF line endings and blank lines") {
    auto t = csv::parse("a,b\r\n1,2\r\n\r\n3,4\r\n");
    REQUIRE(t);
    CHECK(t->rows.size() == 2);
    CHECK(t->rows[1] == csv::Row{"3", "4"});
  }

  TEST_CASE("empty fields are kept") {
    auto t = csv::parse("a,b,c\n,,\n\"\",x,\n");
    REQUIRE(t);
    CHECK(t->rows[0] == csv::Row{"", "", ""});
    CHECK(t->rows[1] == csv::Row{"", "x", ""});
  }

  TEST_CASE("malformed input") {
    std::string error;
    CHECK_FALSE(csv::parse("a\n\"open", &error));
    CHECK(error.find("unterminated") != std::string::npos);
    CHECK_FALSE(csv::parse("a\nx\"y\n", &error));
    CHECK_FALSE(csv::parse("a\n\"x\"y\n", &error));
    CHECK(error.find("line 2") != std::string::npos);
    CHECK_FALSE(csv::parse("", &error));
  }
}
