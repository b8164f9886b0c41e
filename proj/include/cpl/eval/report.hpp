#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpl/core/proof_length.hpp"
#include "cpl/run/event_log.hpp"

namespace cpl {

/// Generation-run totals recomputed from the event log.
struct RunSummary {
  std::string mode;
  bool complete = false;
  std::size_t loops_completed = 0;
  std::size_t theorems_added = 0;
  std::size_t conjectures_accepted = 0;
  std::map<std::string, std::size_t> rejections;  // by reason
  std::size_t proof_attempts = 0;
  std::map<std::string, std::size_t> proof_outcomes;  // by status
  std::size_t warnings = 0;

  nlohmann::json to_json() const;
};

RunSummary summarize_events(const std::vector<RunEvent>& events);

/// Finished calls per role in a transcript (retries of one call count once).
std::map<std::string, std::size_t> transcript_call_counts(const std::filesystem::path& transcript);

struct ReportOptions {
  std::size_t bin_width = 10;
  LengthMetric metric = LengthMetric::lines;
};

/// Writes `report.json`, `report.txt` and, when the directory holds a
/// library, `histogram.csv`. Throws ConfigError naming a missing log.
nlohmann::json emit_reports(const std::filesystem::path& run_dir, const ReportOptions& options = {});

}  // namespace cpl
