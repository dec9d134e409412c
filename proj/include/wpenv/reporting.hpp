#pragma once

#include <cstddef>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wpenv/pipeline.hpp"

namespace wpenv {

struct YearRow {
  std::size_t submitted = 0;
  std::size_t generated = 0;
  std::map<FailureReason, std::size_t> failed;

  friend bool operator==(const YearRow&, const YearRow&) = default;
};

struct BatchReport {
  std::size_t total = 0;
  std::size_t successes = 0;
  double rate = 0.0;
  std::map<int, YearRow> by_year;
  std::map<SourceKind, std::size_t> by_source;  // one count per fetched component
  std::map<FailureReason, std::size_t> by_reason;

  friend bool operator==(const BatchReport&, const BatchReport&) = default;
};

using ProgressCallback = std::function<void(const GenerationOutcome&)>;

/// One outcome per record, sorted by edb_id. `parallelism` workers, at least one.
/// The callback, if any, is called from worker threads under a lock.
std::vector<GenerationOutcome> run_batch(const Corpus& corpus, const Services& services, Mode mode,
                                         std::size_t parallelism, const ProgressCallback& progress = {});

/// Throws Error(UnknownRecord) when an outcome's edb_id is not in `corpus`.
BatchReport summarize(const std::vector<GenerationOutcome>& outcomes, const Corpus& corpus);

std::string render_report_text(const BatchReport& report);
nlohmann::json report_to_json(const BatchReport& report);
/// Throws Error(MalformedDocument).
BatchReport report_from_json(const nlohmann::json& doc);

void write_outcomes(std::ostream& out, const std::vector<GenerationOutcome>& outcomes);
/// Blank lines are skipped. Throws Error(MalformedDocument) naming the line.
std::vector<GenerationOutcome> read_outcomes(std::istream& in);

}  // namespace wpenv
