#include "cpl/engine/conjecture.hpp"

#include <set>

namespace cpl {

bool ConjectureList::contains(const TheoremStatement& stmt) const {
  auto key = normalize_statement(stmt);
  for (const auto& s : items_) {
    if (normalize_statement(s) == key) return true;
  }
  return false;
}

bool ConjectureList::add(const TheoremStatement& stmt) {
  if (contains(stmt)) return false;
  items_.push_back(stmt);
  return true;
}

bool ConjecturePhaseReport::counters_consistent() const {
  return raw_candidates ==
         rejected_parse + rejected_duplicate + rejected_invalid + rejected_known + accepted.size();
}

nlohmann::json ConjecturePhaseReport::summary() const {
  nlohmann::json names = nlohmann::json::array();
  for (const auto& s : accepted.items()) names.push_back(s.name());
  nlohmann::json j{{"iterations_run", iterations_run},
                   {"raw_candidates", raw_candidates},
                   {"rejected_parse", rejected_parse},
                   {"rejected_duplicate", rejected_duplicate},
                   {"rejected_invalid", rejected_invalid},
                   {"rejected_known", rejected_known},
                   {"failed_calls", failed_calls},
                   {"accepted", accepted.size()},
                   {"accepted_names", names}};
  if (aborted) j["aborted"] = *aborted;
  return j;
}

namespace {

void reject(EventSink& events, std::size_t iteration, const std::string& reason, const std::string& text,
            const nlohmann::json& detail = nullptr) {
  nlohmann::json p{{"iteration", iteration}, {"reason", reason}, {"statement", text}};
  if (!detail.is_null()) p["detail"] = detail;
  events.emit(EventKind::conjecture_rejected, std::move(p));
}

}  // namespace

ConjecturePhaseReport run_conjecture_phase(const Library& library, VerifierSession& session,
                                           ChatGateway& gateway, const ConjecturePhaseOptions& options,
                                           EventSink& events) {
  ConjecturePhaseReport report;
  for (std::size_t iteration = 1; iteration <= options.iterations; ++iteration) {
    report.iterations_run = iteration;
    auto context = render_context(library, report.accepted.items(), options.context_budget);
    for (const auto& w : context.warnings) events.emit(EventKind::warning, {{"message", w}});

    ChatResponse response;
    try {
      response = gateway.complete({Role::conjecturer, options.system_prompt, context.text, options.sampling});
    } catch (const FatalError& e) {
      report.aborted = e.what();
      return report;
    } catch (const TransportError& e) {
      ++report.failed_calls;
      events.emit(EventKind::warning, {{"iteration", iteration}, {"message", std::string("conjecturer call failed: ") + e.what()}});
      continue;
    }

    auto parsed = parse_theorem_declarations(response.text);
    for (const auto& w : parsed.warnings) {
      events.emit(EventKind::warning, {{"iteration", iteration}, {"message", "parse: " + w}});
    }
    report.raw_candidates += parsed.statements.size() + parsed.skipped.size();
    for (const auto& skipped : parsed.skipped) {
      ++report.rejected_parse;
      reject(events, iteration, "parse", skipped.text, skipped.reason);
    }

    for (const auto& candidate : parsed.statements) {
      if (report.accepted.contains(candidate)) {
        ++report.rejected_duplicate;
        reject(events, iteration, "duplicate", candidate.source_text());
        continue;
      }
      // The list may have grown since the prompt was rendered.
      auto check_context = render_context(library, report.accepted.items(), options.context_budget).text;
      CheckResult validity;
      CheckResult novelty;
      try {
        validity = session.check_validity(check_context, candidate);
        if (validity.verdict != Verdict::valid) {
          ++report.rejected_invalid;
          reject(events, iteration, "invalid", candidate.source_text(), validity);
          continue;
        }
        novelty = session.check_novelty(check_context, candidate);
      } catch (const TransportError& e) {
        ++report.rejected_invalid;
        reject(events, iteration, "invalid", candidate.source_text(),
               {{"transport_error", e.what()}});
        continue;
      }
      if (novelty.verdict == Verdict::known) {
        ++report.rejected_known;
        reject(events, iteration, "known", candidate.source_text(), novelty);
        continue;
      }
      report.accepted.add(candidate);
      nlohmann::json p{{"iteration", iteration},
                       {"name", candidate.name()},
                       {"statement", candidate.source_text()},
                       {"validity", validity},
                       {"novelty", novelty}};
      events.emit(EventKind::conjecture_accepted, std::move(p));
    }
  }
  return report;
}

}  // namespace cpl
