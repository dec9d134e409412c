#include "wpenv/wpenv.h"

#include <cstdlib>
#include <cstring>
#include <sstream>

#include "json.hpp"
#include "wpenv/corpus.hpp"
#include "wpenv/error.hpp"
#include "wpenv/pipeline.hpp"
#include "wpenv/reporting.hpp"
#include "wpenv/title.hpp"

struct wpenv_corpus {
  wpenv::Corpus corpus;
};

struct wpenv_services {
  wpenv::Services services;
};

namespace {

thread_local std::string g_last_error;

wpenv_status status_for(wpenv::ErrorCode code) {
  using wpenv::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return WPENV_E_INVALID_ARGUMENT;
    case ErrorCode::IndexUnreadable: return WPENV_E_INDEX_UNREADABLE;
    case ErrorCode::DuplicateId: return WPENV_E_DUPLICATE_ID;
    case ErrorCode::UnparsableVersion: return WPENV_E_UNPARSABLE_VERSION;
    case ErrorCode::DictionaryUnavailable: return WPENV_E_DICTIONARY_UNAVAILABLE;
    case ErrorCode::UnknownCve: return WPENV_E_UNKNOWN_CVE;
    case ErrorCode::RegistryUnavailable: return WPENV_E_REGISTRY_UNAVAILABLE;
    case ErrorCode::NoImage: return WPENV_E_NO_IMAGE;
    case ErrorCode::EmptySlug: return WPENV_E_EMPTY_SLUG;
    case ErrorCode::NoVulnerableApplication: return WPENV_E_NO_VULNERABLE_APPLICATION;
    case ErrorCode::WriteFailure: return WPENV_E_WRITE_FAILURE;
    case ErrorCode::BootstrapTimeout: return WPENV_E_BOOTSTRAP_TIMEOUT;
    case ErrorCode::SetupStepFailed: return WPENV_E_SETUP_STEP_FAILED;
    case ErrorCode::UnknownRecord: return WPENV_E_UNKNOWN_RECORD;
    case ErrorCode::MalformedDocument: return WPENV_E_MALFORMED_DOCUMENT;
  }
  return WPENV_E_INTERNAL;
}

template <typename F>
wpenv_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return WPENV_OK;
  } catch (const wpenv::Error& e) {
    g_last_error = e.what();
    return status_for(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return WPENV_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return WPENV_E_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw wpenv::Error(wpenv::ErrorCode::InvalidArgument, what);
}

wpenv::Mode to_mode(wpenv_mode mode) {
  require(mode == WPENV_MODE_EMIT || mode == WPENV_MODE_BOOTSTRAP, "unknown mode");
  return mode == WPENV_MODE_BOOTSTRAP ? wpenv::Mode::EmitAndBootstrap : wpenv::Mode::EmitOnly;
}

}  // namespace

extern "C" {

const char* wpenv_version(void) { return "0.1.0"; }

const char* wpenv_last_error(void) { return g_last_error.c_str(); }

const char* wpenv_status_name(wpenv_status status) {
  switch (status) {
    case WPENV_OK: return "OK";
    case WPENV_E_INTERNAL: return "Internal";
    default:
      if (status >= WPENV_E_INVALID_ARGUMENT && status <= WPENV_E_MALFORMED_DOCUMENT) {
        return wpenv::to_string(static_cast<wpenv::ErrorCode>(status - 1)).data();
      }
      return "Unknown";
  }
}

void wpenv_string_free(char* s) { std::free(s); }

wpenv_status wpenv_corpus_load(const char* dir, wpenv_corpus** out) {
  return guarded([&] {
    require(dir && out, "null argument");
    *out = nullptr;
    auto handle = std::make_unique<wpenv_corpus>();
    handle->corpus = wpenv::load_corpus_dir(dir);
    *out = handle.release();
  });
}

wpenv_status wpenv_corpus_select_wordpress(const wpenv_corpus* corpus, wpenv_corpus** out) {
  return guarded([&] {
    require(corpus && out, "null argument");
    *out = nullptr;
    auto handle = std::make_unique<wpenv_corpus>();
    handle->corpus = wpenv::select_wordpress(corpus->corpus);
    *out = handle.release();
  });
}

void wpenv_corpus_free(wpenv_corpus* corpus) { delete corpus; }

size_t wpenv_corpus_size(const wpenv_corpus* corpus) { return corpus ? corpus->corpus.records.size() : 0; }

wpenv_status wpenv_corpus_warnings(const wpenv_corpus* corpus, char** json_out) {
  return guarded([&] {
    require(corpus && json_out, "null argument");
    *json_out = dup_string(nlohmann::json(corpus->corpus.warnings).dump());
  });
}

wpenv_status wpenv_services_create_offline(const char* fixtures_dir, const char* out_dir, wpenv_services** out) {
  return guarded([&] {
    require(fixtures_dir && out_dir && out, "null argument");
    *out = nullptr;
    auto handle = std::make_unique<wpenv_services>();
    handle->services = wpenv::offline_services(fixtures_dir, out_dir);
    *out = handle.release();
  });
}

wpenv_status wpenv_services_create_live(const char* out_dir, wpenv_services** out) {
  return guarded([&] {
    require(out_dir && out, "null argument");
    *out = nullptr;
    auto handle = std::make_unique<wpenv_services>();
    handle->services = wpenv::live_services(out_dir);
    *out = handle.release();
  });
}

void wpenv_services_free(wpenv_services* services) { delete services; }

wpenv_status wpenv_services_set_config_json(wpenv_services* services, const char* json) {
  return guarded([&] {
    require(services && json, "null argument");
    auto doc = nlohmann::json::parse(json, nullptr, false);
    if (doc.is_discarded()) throw wpenv::Error(wpenv::ErrorCode::MalformedDocument, "config is not JSON");
    services->services.config = wpenv::config_from_json(doc);
  });
}

wpenv_status wpenv_services_set_fixed_time(wpenv_services* services, int64_t unix_seconds) {
  return guarded([&] {
    require(services, "null argument");
    auto t = std::chrono::system_clock::time_point(std::chrono::seconds(unix_seconds));
    services->services.wall_clock = [t] { return t; };
  });
}

wpenv_status wpenv_generate(const wpenv_corpus* corpus, const wpenv_services* services, int64_t edb_id,
                            wpenv_mode mode, int* success, char** outcome_json) {
  return guarded([&] {
    require(corpus && services && success && outcome_json, "null argument");
    const auto* record = corpus->corpus.find(edb_id);
    if (!record) throw wpenv::Error(wpenv::ErrorCode::UnknownRecord, "EDB-" + std::to_string(edb_id) + " not in corpus");
    auto outcome = wpenv::generate(*record, services->services, to_mode(mode));
    *outcome_json = dup_string(wpenv::outcome_to_json(outcome).dump());
    *success = outcome.success() ? 1 : 0;
  });
}

wpenv_status wpenv_batch(const wpenv_corpus* corpus, const wpenv_services* services, wpenv_mode mode,
                         unsigned parallelism, char** outcomes_ndjson) {
  return guarded([&] {
    require(corpus && services && outcomes_ndjson, "null argument");
    auto outcomes = wpenv::run_batch(corpus->corpus, services->services, to_mode(mode), parallelism);
    std::ostringstream out;
    wpenv::write_outcomes(out, outcomes);
    *outcomes_ndjson = dup_string(out.str());
  });
}

wpenv_status wpenv_stats(const wpenv_corpus* corpus, const char* outcomes_ndjson, int as_json, char** report_out) {
  return guarded([&] {
    require(corpus && outcomes_ndjson && report_out, "null argument");
    std::istringstream in(outcomes_ndjson);
    auto report = wpenv::summarize(wpenv::read_outcomes(in), corpus->corpus);
    *report_out = dup_string(as_json ? wpenv::report_to_json(report).dump(2) : wpenv::render_report_text(report));
  });
}

wpenv_status wpenv_classify(const wpenv_corpus* corpus, char** counts_json) {
  return guarded([&] {
    require(corpus && counts_json, "null argument");
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [category, n] : wpenv::classify_corpus(corpus->corpus)) {
      doc[std::string(wpenv::to_string(category))] = n;
    }
    *counts_json = dup_string(doc.dump());
  });
}

wpenv_status wpenv_parse_title(const char* title, char** parsed_json) {
  return guarded([&] {
    require(title && parsed_json, "null argument");
    auto parsed = wpenv::parse_title(title);
    auto opt = [](const std::optional<std::string>& s) { return s ? nlohmann::json(*s) : nlohmann::json(nullptr); };
    nlohmann::json doc = {{"category", wpenv::to_string(parsed.category)},
                          {"product", opt(parsed.product)},
                          {"version", opt(parsed.version_expr)},
                          {"attack_type", parsed.attack_type}};
    *parsed_json = dup_string(doc.dump());
  });
}

}  // extern "C"
