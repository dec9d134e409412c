// Command-line front end over the C interface.

#include <cstdio>
#include <ctime>
#include <iomanip>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "wpenv/wpenv.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitGenerationFailed = 2;

struct CorpusDeleter {
  void operator()(wpenv_corpus* c) const { wpenv_corpus_free(c); }
};
struct ServicesDeleter {
  void operator()(wpenv_services* s) const { wpenv_services_free(s); }
};
using CorpusPtr = std::unique_ptr<wpenv_corpus, CorpusDeleter>;
using ServicesPtr = std::unique_ptr<wpenv_services, ServicesDeleter>;

struct CliFailure {
  std::string message;
};

void check(wpenv_status status, const std::string& what) {
  if (status != WPENV_OK) {
    throw CliFailure{what + ": " + wpenv_status_name(status) + ": " + wpenv_last_error()};
  }
}

std::string take(char* s) {
  std::string out = s ? s : "";
  wpenv_string_free(s);
  return out;
}

struct Options {
  std::string corpus_dir;
  std::string fixtures_dir;
  std::string out_dir = "out";
  std::string mode = "emit";
  std::string config_path;
  std::string fixed_time;
  unsigned parallelism = 4;
  bool json = false;
};

CorpusPtr load_corpus(const Options& o) {
  if (o.corpus_dir.empty()) throw CliFailure{"--corpus is required"};
  wpenv_corpus* raw = nullptr;
  check(wpenv_corpus_load(o.corpus_dir.c_str(), &raw), "loading corpus");
  CorpusPtr corpus(raw);
  char* warnings = nullptr;
  check(wpenv_corpus_warnings(corpus.get(), &warnings), "reading warnings");
  for (const auto& w : nlohmann::json::parse(take(warnings))) std::cerr << "warning: " << w.get<std::string>() << "\n";
  return corpus;
}

std::optional<std::int64_t> parse_fixed_time(const std::string& text) {
  if (text.empty()) return std::nullopt;
  if (text.find_first_not_of("0123456789") == std::string::npos) return std::stoll(text);
  std::tm tm{};
  std::istringstream in(text);
  in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  if (in.fail()) throw CliFailure{"--fixed-time expects unix seconds or YYYY-MM-DDTHH:MM:SSZ"};
  return static_cast<std::int64_t>(timegm(&tm));
}

ServicesPtr make_services(const Options& o) {
  wpenv_services* raw = nullptr;
  if (o.fixtures_dir.empty()) {
    check(wpenv_services_create_live(o.out_dir.c_str(), &raw), "creating live clients");
  } else {
    check(wpenv_services_create_offline(o.fixtures_dir.c_str(), o.out_dir.c_str(), &raw), "loading fixtures");
  }
  ServicesPtr services(raw);
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw CliFailure{"cannot read " + o.config_path};
    std::string text((std::istreambuf_iterator<char>(in)), {});
    check(wpenv_services_set_config_json(services.get(), text.c_str()), "applying config");
  }
  if (auto t = parse_fixed_time(o.fixed_time)) {
    check(wpenv_services_set_fixed_time(services.get(), *t), "setting fixed time");
  }
  return services;
}

wpenv_mode mode_of(const Options& o) { return o.mode == "bootstrap" ? WPENV_MODE_BOOTSTRAP : WPENV_MODE_EMIT; }

std::string describe(const nlohmann::json& outcome) {
  std::ostringstream out;
  out << "EDB-" << outcome["edb_id"].get<std::int64_t>() << ": ";
  if (outcome["status"] == "Success") {
    const auto& plan = outcome["plan"];
    out << "Success  image " << plan["image"]["repository"].get<std::string>() << ":"
        << plan["image"]["tag"].get<std::string>();
    for (const auto& c : plan["components"]) {
      out << "  " << c["kind"].get<std::string>() << " " << c["slug"].get<std::string>() << " via "
          << c["source"].get<std::string>();
    }
    out << "  -> " << outcome["manifest"]["directory"].get<std::string>();
  } else {
    out << "Failure  " << outcome["reason"].get<std::string>() << "  " << outcome["detail"].get<std::string>();
  }
  return out.str();
}

int cmd_generate(const Options& o, std::int64_t edb_id) {
  auto corpus = load_corpus(o);
  auto services = make_services(o);
  int success = 0;
  char* json = nullptr;
  check(wpenv_generate(corpus.get(), services.get(), edb_id, mode_of(o), &success, &json), "generate");
  auto outcome = nlohmann::json::parse(take(json));
  std::cout << (o.json ? outcome.dump(2) : describe(outcome)) << "\n";
  return success ? kExitOk : kExitGenerationFailed;
}

int cmd_batch(const Options& o, std::string outcomes_path) {
  auto all = load_corpus(o);
  wpenv_corpus* raw = nullptr;
  check(wpenv_corpus_select_wordpress(all.get(), &raw), "selecting WordPress records");
  CorpusPtr corpus(raw);
  auto services = make_services(o);

  char* ndjson = nullptr;
  check(wpenv_batch(corpus.get(), services.get(), mode_of(o), o.parallelism, &ndjson), "batch");
  std::string outcomes = take(ndjson);

  if (outcomes_path.empty()) outcomes_path = (std::filesystem::path(o.out_dir) / "outcomes.ndjson").string();
  std::filesystem::create_directories(std::filesystem::path(outcomes_path).parent_path());
  std::ofstream file(outcomes_path, std::ios::binary | std::ios::trunc);
  file << outcomes;
  if (!file.flush()) throw CliFailure{"cannot write " + outcomes_path};
  std::cerr << "outcomes written to " << outcomes_path << "\n";

  char* report = nullptr;
  check(wpenv_stats(corpus.get(), outcomes.c_str(), o.json ? 1 : 0, &report), "summarizing");
  std::cout << take(report);
  if (o.json) std::cout << "\n";
  return kExitOk;
}

int cmd_stats(const Options& o, const std::string& outcomes_path) {
  auto corpus = load_corpus(o);
  std::ifstream in(outcomes_path, std::ios::binary);
  if (!in) throw CliFailure{"cannot read " + outcomes_path};
  std::string outcomes((std::istreambuf_iterator<char>(in)), {});
  char* report = nullptr;
  check(wpenv_stats(corpus.get(), outcomes.c_str(), o.json ? 1 : 0, &report), "summarizing");
  std::cout << take(report);
  if (o.json) std::cout << "\n";
  return kExitOk;
}

int cmd_classify(const Options& o) {
  auto corpus = load_corpus(o);
  char* json = nullptr;
  check(wpenv_classify(corpus.get(), &json), "classify");
  auto counts = nlohmann::json::parse(take(json));
  if (o.json) {
    std::cout << counts.dump(2) << "\n";
  } else {
    for (const char* key : {"Core", "Plugin", "Theme", "Uncategorized"}) {
      std::cout << key << ": " << counts.value(key, 0) << "\n";
    }
  }
  return kExitOk;
}

int cmd_parse_title(const Options& o, const std::string& title) {
  char* json = nullptr;
  check(wpenv_parse_title(title.c_str(), &json), "parse-title");
  auto parsed = nlohmann::json::parse(take(json));
  std::cout << (o.json ? parsed.dump(2) : parsed.dump()) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generates vulnerable WordPress environments from exploit database entries."};
  app.require_subcommand(1);
  Options o;
  app.add_option("--corpus", o.corpus_dir, "Directory holding files_exploits.csv")->check(CLI::ExistingDirectory);
  app.add_option("--fixtures", o.fixtures_dir, "Use offline clients backed by this fixtures directory")
      ->check(CLI::ExistingDirectory);
  app.add_option("--out", o.out_dir, "Output directory for bundles")->capture_default_str();
  app.add_option("--mode", o.mode, "emit, or bootstrap to also start and configure the stack")
      ->check(CLI::IsMember({"emit", "bootstrap"}))
      ->capture_default_str();
  app.add_option("--parallelism", o.parallelism, "Batch worker count")
      ->check(CLI::Range(1u, 256u))
      ->capture_default_str();
  app.add_option("--config", o.config_path, "Generator config JSON")->check(CLI::ExistingFile);
  app.add_option("--fixed-time", o.fixed_time, "Timestamp stamped into provenance (unix seconds or ISO 8601 UTC)");
  app.add_flag("--json", o.json, "Machine-readable output");

  std::int64_t edb_id = 0;
  auto* generate = app.add_subcommand("generate", "Generate one environment");
  generate->add_option("--edb-id", edb_id, "Exploit database id")->required();

  std::string outcomes_out;
  auto* batch = app.add_subcommand("batch", "Generate every WordPress record in the corpus");
  batch->add_option("--outcomes", outcomes_out, "Outcome file (default <out>/outcomes.ndjson)");

  std::string outcomes_in;
  auto* stats = app.add_subcommand("stats", "Summarize an outcomes file");
  stats->add_option("outcomes", outcomes_in, "Newline-delimited outcome JSON")->required()->check(CLI::ExistingFile);

  auto* classify = app.add_subcommand("classify", "Count title categories in the corpus");

  std::string title;
  auto* parse = app.add_subcommand("parse-title", "Show how a title is parsed");
  parse->add_option("title", title)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*generate) return cmd_generate(o, edb_id);
    if (*batch) return cmd_batch(o, outcomes_out);
    if (*stats) return cmd_stats(o, outcomes_in);
    if (*classify) return cmd_classify(o);
    if (*parse) return cmd_parse_title(o, title);
  } catch (const CliFailure& e) {
    std::cerr << "wpenv: " << e.message << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "wpenv: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
