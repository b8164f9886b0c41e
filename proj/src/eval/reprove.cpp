#include "cpl/eval/reprove.hpp"

#include <algorithm>
#include <functional>
#include <future>

#include "cpl/core/text.hpp"
#include "cpl/llm/gateway.hpp"
#include "cpl/verifier/session.hpp"

namespace cpl {

std::string to_string(ReproveMode m) {
  return m == ReproveMode::with_context ? "with_context" : "definitions_only";
}

ReproveMode reprove_mode_from_string(std::string_view s) {
  if (s == "with_context" || s == "with-context") return ReproveMode::with_context;
  if (s == "definitions_only" || s == "definitions-only") return ReproveMode::definitions_only;
  throw ConfigError("unknown reprove mode '" + std::string(s) + "' (expected with_context|definitions_only)");
}

std::size_t ReproveReport::count(ProofStatus s) const {
  return static_cast<std::size_t>(
      std::count_if(per_theorem.begin(), per_theorem.end(), [s](const auto& i) { return i.status == s; }));
}

std::size_t ReproveReport::transport_failures() const {
  return static_cast<std::size_t>(
      std::count_if(per_theorem.begin(), per_theorem.end(), [](const auto& i) { return i.transport_failure; }));
}

nlohmann::json ReproveReport::to_json() const {
  auto rate = success_rate();
  nlohmann::json items = nlohmann::json::array();
  for (const auto& i : per_theorem) {
    items.push_back({{"index", i.sequence_index}, {"name", i.name}, {"status", to_string(i.status)},
                     {"attempts", i.attempts}, {"transport_failure", i.transport_failure}});
  }
  return {{"campaign", campaign},
          {"mode", to_string(mode)},
          {"total", total()},
          {"verified", count(ProofStatus::verified)},
          {"failed_exhausted", count(ProofStatus::failed_exhausted)},
          {"declared_unprovable", count(ProofStatus::declared_unprovable)},
          {"transport_failures", transport_failures()},
          {"success_rate", rate.exact()},
          {"success_percent", rate.percent()},
          {"per_theorem", items}};
}

ReproveReport ReproveReport::from_events(const std::vector<RunEvent>& events, std::string_view campaign,
                                         ReproveMode mode) {
  ReproveReport r;
  r.campaign = std::string(campaign);
  r.mode = mode;
  for (const auto& e : events) {
    if (e.kind != EventKind::reprove_result) continue;
    const auto& p = e.payload;
    if (p.value("campaign", "") != campaign || p.value("mode", "") != to_string(mode)) continue;
    ReproveItem i;
    i.sequence_index = p.at("index").get<std::size_t>();
    i.name = p.value("name", "");
    i.status = proof_status_from_string(p.at("status").get<std::string>());
    i.attempts = p.value("attempts", std::size_t{0});
    i.context_entries = p.value("context_entries", std::size_t{0});
    i.context_hash = p.value("context_hash", "");
    i.transport_failure = p.value("transport_failure", false);
    r.per_theorem.push_back(std::move(i));
  }
  return r;
}

namespace {

bool lost_to_transport(const ProofOutcome& outcome) {
  return std::any_of(outcome.attempts.begin(), outcome.attempts.end(), [](const ProofAttempt& a) {
    return a.check && !a.check->diagnostics.empty() &&
           a.check->diagnostics.front().message.find("transport: ") != std::string::npos;
  });
}

struct Job {
  std::size_t index;
  const TheoremStatement* statement;
  Library context;
};

void run_jobs(ReproveReport& report, std::vector<Job> jobs, SessionPool& sessions, ChatGateway& gateway,
              const ReproveOptions& options, EventSink& events) {
  auto record = [&](const Job& job, const ProofOutcome& outcome) {
    ReproveItem item{job.index,
                     job.statement->name(),
                     outcome.status,
                     outcome.attempts.size(),
                     job.context.size(),
                     text::fnv1a_hex(outcome.verifier_context),
                     outcome.status != ProofStatus::verified && lost_to_transport(outcome)};
    events.emit(EventKind::reprove_result, {{"campaign", report.campaign},
                                            {"mode", to_string(report.mode)},
                                            {"index", item.sequence_index},
                                            {"name", item.name},
                                            {"status", to_string(item.status)},
                                            {"attempts", item.attempts},
                                            {"context_entries", item.context_entries},
                                            {"context_hash", item.context_hash},
                                            {"transport_failure", item.transport_failure}});
    report.per_theorem.push_back(std::move(item));
  };

  std::size_t workers = std::max<std::size_t>(1, options.workers);
  for (std::size_t begin = 0; begin < jobs.size(); begin += workers) {
    std::size_t end = std::min(jobs.size(), begin + workers);
    if (workers == 1) {
      auto lease = sessions.acquire();
      record(jobs[begin], prove(*jobs[begin].statement, jobs[begin].context, *lease, gateway, options.prover));
      continue;
    }
    std::vector<std::future<ProofOutcome>> pending;
    for (std::size_t i = begin; i < end; ++i) {
      pending.push_back(std::async(std::launch::async, [&, i] {
        auto lease = sessions.acquire();
        return prove(*jobs[i].statement, jobs[i].context, *lease, gateway, options.prover);
      }));
    }
    for (std::size_t i = begin; i < end; ++i) record(jobs[i], pending[i - begin].get());
  }
}

}  // namespace

ReproveReport reprove_all(const Library& library, ReproveMode mode, SessionPool& sessions, ChatGateway& gateway,
                          const ReproveOptions& options, EventSink& events) {
  if (library.empty()) throw ConfigError("reprove_all needs a non-empty library");
  ReproveReport report;
  report.campaign = "reprove_all";
  report.mode = mode;
  std::vector<Job> jobs;
  const Library seed_only(library.seed_source());
  for (std::size_t i = 0; i < library.size(); ++i) {
    jobs.push_back({i, &library.entries()[i].statement,
                    mode == ReproveMode::with_context ? library.prefix(i) : seed_only});
  }
  run_jobs(report, std::move(jobs), sessions, gateway, options, events);
  return report;
}

ReproveReport reprove_focused(const TheoremStatement& statement, const Library& prefix, std::size_t n,
                              ReproveMode mode, SessionPool& sessions, ChatGateway& gateway,
                              const ReproveOptions& options, EventSink& events) {
  if (n == 0) throw ConfigError("repetitions must be positive");
  ReproveReport report;
  report.campaign = "reprove_focused";
  report.mode = mode;
  const Library context = mode == ReproveMode::with_context ? prefix : Library(prefix.seed_source());
  std::vector<Job> jobs;
  for (std::size_t r = 0; r < n; ++r) jobs.push_back({r, &statement, context});
  run_jobs(report, std::move(jobs), sessions, gateway, options, events);
  return report;
}

}  // namespace cpl
