/* C interface to the wpenv library.
 *
 * Handles are opaque and owned by the caller; free them with the matching
 * *_free function. Strings returned through `char**` are heap-allocated and
 * must be released with wpenv_string_free. On a non-OK status,
 * wpenv_last_error() describes the failure for the calling thread.
 */
#ifndef WPENV_H
#define WPENV_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define WPENV_API __attribute__((visibility("default")))
#else
#define WPENV_API
#endif

typedef enum wpenv_status {
  WPENV_OK = 0,
  WPENV_E_INVALID_ARGUMENT = 1,
  WPENV_E_INDEX_UNREADABLE = 2,
  WPENV_E_DUPLICATE_ID = 3,
  WPENV_E_UNPARSABLE_VERSION = 4,
  WPENV_E_DICTIONARY_UNAVAILABLE = 5,
  WPENV_E_UNKNOWN_CVE = 6,
  WPENV_E_REGISTRY_UNAVAILABLE = 7,
  WPENV_E_NO_IMAGE = 8,
  WPENV_E_EMPTY_SLUG = 9,
  WPENV_E_NO_VULNERABLE_APPLICATION = 10,
  WPENV_E_WRITE_FAILURE = 11,
  WPENV_E_BOOTSTRAP_TIMEOUT = 12,
  WPENV_E_SETUP_STEP_FAILED = 13,
  WPENV_E_UNKNOWN_RECORD = 14,
  WPENV_E_MALFORMED_DOCUMENT = 15,
  WPENV_E_INTERNAL = 99
} wpenv_status;

typedef enum wpenv_mode {
  WPENV_MODE_EMIT = 0,
  WPENV_MODE_BOOTSTRAP = 1
} wpenv_mode;

typedef struct wpenv_corpus wpenv_corpus;
typedef struct wpenv_services wpenv_services;

WPENV_API const char* wpenv_version(void);
/* Message for the last failed call on this thread; "" when none. */
WPENV_API const char* wpenv_last_error(void);
WPENV_API const char* wpenv_status_name(wpenv_status status);
WPENV_API void wpenv_string_free(char* s);

/* Loads `<dir>/files_exploits.csv` with PoC paths relative to `dir` and
 * attached archives under `<dir>/apps`. */
WPENV_API wpenv_status wpenv_corpus_load(const char* dir, wpenv_corpus** out);
/* New corpus holding the records whose title starts with "WordPress". */
WPENV_API wpenv_status wpenv_corpus_select_wordpress(const wpenv_corpus* corpus, wpenv_corpus** out);
WPENV_API void wpenv_corpus_free(wpenv_corpus* corpus);
WPENV_API size_t wpenv_corpus_size(const wpenv_corpus* corpus);
/* JSON array of load warnings. */
WPENV_API wpenv_status wpenv_corpus_warnings(const wpenv_corpus* corpus, char** json_out);

/* Offline clients read from a fixtures directory; see docs/fixtures.md. */
WPENV_API wpenv_status wpenv_services_create_offline(const char* fixtures_dir, const char* out_dir,
                                                     wpenv_services** out);
WPENV_API wpenv_status wpenv_services_create_live(const char* out_dir, wpenv_services** out);
WPENV_API void wpenv_services_free(wpenv_services* services);
/* Overlays a generator config JSON object onto the defaults. */
WPENV_API wpenv_status wpenv_services_set_config_json(wpenv_services* services, const char* json);
/* Stamps every bundle with this time instead of the wall clock. */
WPENV_API wpenv_status wpenv_services_set_fixed_time(wpenv_services* services, int64_t unix_seconds);

/* Outcome JSON in *outcome_json; *success is 1 on Success, 0 on Failure.
 * A generation failure still returns WPENV_OK. */
WPENV_API wpenv_status wpenv_generate(const wpenv_corpus* corpus, const wpenv_services* services, int64_t edb_id,
                                      wpenv_mode mode, int* success, char** outcome_json);
/* Newline-delimited outcome JSON, ascending by EDB-ID. */
WPENV_API wpenv_status wpenv_batch(const wpenv_corpus* corpus, const wpenv_services* services, wpenv_mode mode,
                                   unsigned parallelism, char** outcomes_ndjson);
/* Report over newline-delimited outcomes, as text or (as_json != 0) JSON. */
WPENV_API wpenv_status wpenv_stats(const wpenv_corpus* corpus, const char* outcomes_ndjson, int as_json,
                                   char** report_out);
/* Category histogram of WordPress-prefixed titles as a JSON object. */
WPENV_API wpenv_status wpenv_classify(const wpenv_corpus* corpus, char** counts_json);
WPENV_API wpenv_status wpenv_parse_title(const char* title, char** parsed_json);

#ifdef __cplusplus
}
#endif

#endif /* WPENV_H */
