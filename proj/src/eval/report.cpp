#include "cpl/eval/report.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "cpl/core/library.hpp"
#include "cpl/core/text.hpp"
#include "cpl/error.hpp"
#include "cpl/eval/histogram.hpp"
#include "cpl/eval/nl.hpp"
#include "cpl/eval/reprove.hpp"
#include "cpl/run/orchestrator.hpp"

namespace cpl {

namespace fs = std::filesystem;

nlohmann::json RunSummary::to_json() const {
  return {{"mode", mode},
          {"complete", complete},
          {"loops_completed", loops_completed},
          {"theorems_added", theorems_added},
          {"conjectures_accepted", conjectures_accepted},
          {"rejections", rejections},
          {"proof_attempts", proof_attempts},
          {"proof_outcomes", proof_outcomes},
          {"warnings", warnings}};
}

RunSummary summarize_events(const std::vector<RunEvent>& events) {
  RunSummary s;
  for (const auto& e : events) {
    switch (e.kind) {
      case EventKind::run_start:
        s.mode = e.payload.value("mode", "");
        break;
      case EventKind::run_complete:
        s.complete = true;
        break;
      case EventKind::loop_complete:
        ++s.loops_completed;
        break;
      case EventKind::theorem_added:
        ++s.theorems_added;
        break;
      case EventKind::conjecture_accepted:
        ++s.conjectures_accepted;
        break;
      case EventKind::conjecture_rejected:
        ++s.rejections[e.payload.value("reason", "unknown")];
        break;
      case EventKind::proof_attempt:
        ++s.proof_attempts;
        break;
      case EventKind::proof_complete:
        ++s.proof_outcomes[e.payload.value("status", "unknown")];
        break;
      case EventKind::warning:
        ++s.warnings;
        break;
      default:
        break;
    }
  }
  return s;
}

std::map<std::string, std::size_t> transcript_call_counts(const fs::path& transcript) {
  std::map<std::string, std::size_t> out;
  std::ifstream in(transcript);
  if (!in) throw ConfigError("missing transcript " + transcript.string());
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;  // torn final line
    if (j.value("outcome", "") != "retry") ++out[j.value("role", "")];
  }
  return out;
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out.flush()) throw FatalError("cannot write " + path.string());
}

std::string rate_table(const std::vector<ReproveReport>& reports) {
  std::ostringstream out;
  out << "campaign         mode              verified  failed  declared  rate\n";
  for (const auto& r : reports) {
    auto pad = [](std::string s, std::size_t w) { return s + std::string(s.size() < w ? w - s.size() : 1, ' '); };
    auto rate = r.success_rate();
    out << pad(r.campaign, 17) << pad(to_string(r.mode), 18) << pad(std::to_string(r.count(ProofStatus::verified)), 10)
        << pad(std::to_string(r.count(ProofStatus::failed_exhausted)), 8)
        << pad(std::to_string(r.count(ProofStatus::declared_unprovable)), 10) << rate.exact() << " ("
        << rate.percent() << ")\n";
  }
  return out.str();
}

}  // namespace

nlohmann::json emit_reports(const fs::path& dir, const ReportOptions& options) {
  const fs::path events_path = dir / kEventsFile;
  const fs::path transcript_path = dir / kTranscriptFile;
  if (!fs::exists(events_path)) throw ConfigError("missing event log " + events_path.string());
  if (!fs::exists(transcript_path)) throw ConfigError("missing transcript " + transcript_path.string());

  auto events = EventLog::read(events_path);
  auto summary = summarize_events(events);
  auto calls = transcript_call_counts(transcript_path);

  nlohmann::json report{{"run", summary.to_json()}, {"transcript_calls", calls}};
  std::ostringstream text;
  text << "mode: " << summary.mode << (summary.complete ? "" : " (incomplete)") << '\n';

  if (summary.mode == "cpl" || summary.mode == "simple_loop") {
    text << "loops completed: " << summary.loops_completed << '\n'
         << "theorems added: " << summary.theorems_added << '\n'
         << "proof attempts: " << summary.proof_attempts << '\n';
    if (summary.mode == "cpl") {
      text << "conjectures accepted: " << summary.conjectures_accepted << '\n';
      for (const auto& [reason, n] : summary.rejections) text << "rejected (" << reason << "): " << n << '\n';
      std::size_t prover_calls = calls.count("prover") ? calls.at("prover") : 0;
      report["prover_calls_match_attempts"] = prover_calls == summary.proof_attempts;
    }
  }

  std::set<std::pair<std::string, std::string>> campaigns;
  for (const auto& e : events) {
    if (e.kind == EventKind::reprove_result) {
      campaigns.emplace(e.payload.value("campaign", ""), e.payload.value("mode", ""));
    }
  }
  if (!campaigns.empty()) {
    std::vector<ReproveReport> reprove;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [campaign, mode] : campaigns) {
      reprove.push_back(ReproveReport::from_events(events, campaign, reprove_mode_from_string(mode)));
      arr.push_back(reprove.back().to_json());
    }
    report["reprove"] = arr;
    text << "\n" << rate_table(reprove);
  }

  const fs::path library_path = dir / kLibraryFile;
  if (fs::exists(library_path)) {
    auto library = read_library_file(library_path);
    auto bins = proof_length_histogram(library, options.bin_width, options.metric);
    nlohmann::json jbins = nlohmann::json::array();
    for (const auto& b : bins) jbins.push_back({{"start", b.start}, {"count", b.count}});
    report["library_size"] = library.size();
    report["histogram"] = {{"bin_width", options.bin_width}, {"metric", to_string(options.metric)}, {"bins", jbins}};
    write_file(dir / "histogram.csv", histogram_csv(bins, options.bin_width));
    text << "\nproof lengths (" << to_string(options.metric) << ", bin width " << options.bin_width << ")\n"
         << histogram_table(bins, options.bin_width);
  }

  if (fs::exists(dir / "nl_responses")) {
    auto breakdown = NlStore(dir).breakdown();
    report["nl"] = breakdown.to_json();
    text << "\nnatural-language session\n" << breakdown.table();
  }

  write_file(dir / kReportFile, report.dump(2) + "\n");
  write_file(dir / "report.txt", text.str());
  return report;
}

}  // namespace cpl
