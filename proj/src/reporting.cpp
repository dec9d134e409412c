#include "wpenv/reporting.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include "text.hpp"
#include "wpenv/error.hpp"

namespace wpenv {

std::vector<GenerationOutcome> run_batch(const Corpus& corpus, const Services& services, Mode mode,
                                         std::size_t parallelism, const ProgressCallback& progress) {
  std::vector<const ExploitRecord*> records;
  for (const auto& [id, record] : corpus.records) records.push_back(&record);
  std::vector<GenerationOutcome> outcomes(records.size());

  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      outcomes[i] = generate(*records[i], services, mode);
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(outcomes[i]);
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    std::size_t n = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(records.size(), 1));
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
  }
  // corpus.records is keyed by id, so the slots are already ascending.
  return outcomes;
}

BatchReport summarize(const std::vector<GenerationOutcome>& outcomes, const Corpus& corpus) {
  BatchReport report;
  for (const auto& o : outcomes) {
    const ExploitRecord* record = corpus.find(o.edb_id);
    if (!record) throw Error(ErrorCode::UnknownRecord, "EDB-" + std::to_string(o.edb_id) + " is not in the corpus");
    YearRow& row = report.by_year[static_cast<int>(record->published.year())];
    ++report.total;
    ++row.submitted;
    if (o.success()) {
      ++report.successes;
      ++row.generated;
      if (o.plan) {
        for (const auto& c : o.plan->components) ++report.by_source[c.source.kind];
      }
    } else {
      FailureReason reason = o.reason.value_or(FailureReason::FetchFailure);
      ++report.by_reason[reason];
      ++row.failed[reason];
    }
  }
  report.rate = report.total ? static_cast<double>(report.successes) / static_cast<double>(report.total) : 0.0;
  return report;
}

namespace {

std::string percent(std::size_t part, std::size_t whole) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f%%", whole ? 100.0 * static_cast<double>(part) / static_cast<double>(whole) : 0.0);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

constexpr FailureReason kReasons[] = {FailureReason::UnparsableTitle, FailureReason::NoVulnerableApplication,
                                      FailureReason::NoImage,         FailureReason::ErrorDuringSetup,
                                      FailureReason::UnknownVersion,  FailureReason::FetchFailure};

}  // namespace

std::string render_report_text(const BatchReport& report) {
  std::ostringstream out;
  out << "Generated " << report.successes << " of " << report.total << " environments ("
      << percent(report.successes, report.total) << ")\n";

  std::size_t extensions = 0;
  for (const auto& [kind, n] : report.by_source) extensions += n;
  out << "\nExtension sources\n";
  for (SourceKind kind : {SourceKind::SvnRepo, SourceKind::ExploitDbApp, SourceKind::SoftwareLink}) {
    auto it = report.by_source.find(kind);
    std::size_t n = it == report.by_source.end() ? 0 : it->second;
    out << "  " << to_string(kind) << ": " << n << " (" << percent(n, extensions) << ")\n";
  }

  out << "\nFailures\n";
  for (FailureReason reason : kReasons) {
    auto it = report.by_reason.find(reason);
    if (it != report.by_reason.end()) out << "  " << to_string(reason) << ": " << it->second << "\n";
  }

  out << "\n" << pad("year", 4) << pad("submitted", 11) << pad("generated", 11) << pad("failed", 8) << "  reasons\n";
  for (const auto& [year, row] : report.by_year) {
    std::size_t failed = 0;
    std::string reasons;
    for (const auto& [reason, n] : row.failed) {
      failed += n;
      reasons += (reasons.empty() ? "" : ", ") + std::string(to_string(reason)) + "=" + std::to_string(n);
    }
    out << pad(std::to_string(year), 4) << pad(std::to_string(row.submitted), 11)
        << pad(std::to_string(row.generated), 11) << pad(std::to_string(failed), 8) << "  " << reasons << "\n";
  }
  return out.str();
}

nlohmann::json report_to_json(const BatchReport& report) {
  auto reasons = [](const std::map<FailureReason, std::size_t>& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [r, n] : m) j[std::string(to_string(r))] = n;
    return j;
  };
  nlohmann::json years = nlohmann::json::object();
  for (const auto& [year, row] : report.by_year) {
    years[std::to_string(year)] = {
        {"submitted", row.submitted}, {"generated", row.generated}, {"failed", reasons(row.failed)}};
  }
  nlohmann::json sources = nlohmann::json::object();
  for (const auto& [kind, n] : report.by_source) sources[std::string(to_string(kind))] = n;
  return {{"total", report.total},         {"successes", report.successes}, {"rate", report.rate},
          {"by_year", std::move(years)},   {"by_source", std::move(sources)}, {"by_reason", reasons(report.by_reason)}};
}

BatchReport report_from_json(const nlohmann::json& doc) {
  auto reasons = [](const nlohmann::json& j) {
    std::map<FailureReason, std::size_t> m;
    for (const auto& [name, n] : j.items()) {
      auto r = failure_reason_from_string(name);
      if (!r) throw Error(ErrorCode::MalformedDocument, "unknown failure reason '" + name + "'");
      m[*r] = n.get<std::size_t>();
    }
    return m;
  };
  try {
    BatchReport report;
    report.total = doc.at("total").get<std::size_t>();
    report.successes = doc.at("successes").get<std::size_t>();
    report.rate = doc.at("rate").get<double>();
    for (const auto& [year, row] : doc.at("by_year").items()) {
      YearRow r;
      r.submitted = row.at("submitted").get<std::size_t>();
      r.generated = row.at("generated").get<std::size_t>();
      r.failed = reasons(row.at("failed"));
      report.by_year[std::stoi(year)] = std::move(r);
    }
    for (const auto& [name, n] : doc.at("by_source").items()) {
      auto kind = source_kind_from_string(name);
      if (!kind) throw Error(ErrorCode::MalformedDocument, "unknown source '" + name + "'");
      report.by_source[*kind] = n.get<std::size_t>();
    }
    report.by_reason = reasons(doc.at("by_reason"));
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("report: ") + e.what());
  } catch (const std::logic_error& e) {  // std::stoi
    throw Error(ErrorCode::MalformedDocument, std::string("report: bad year key: ") + e.what());
  }
}

void write_outcomes(std::ostream& out, const std::vector<GenerationOutcome>& outcomes) {
  for (const auto& o : outcomes) out << outcome_to_json(o).dump() << "\n";
}

std::vector<GenerationOutcome> read_outcomes(std::istream& in) {
  std::vector<GenerationOutcome> outcomes;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (text::trim(line).empty()) continue;
    auto doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded()) {
      throw Error(ErrorCode::MalformedDocument, "outcomes line " + std::to_string(number) + ": not JSON");
    }
    try {
      outcomes.push_back(outcome_from_json(doc));
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedDocument, "outcomes line " + std::to_string(number) + ": " + e.what());
    }
  }
  return outcomes;
}

}  // namespace wpenv
