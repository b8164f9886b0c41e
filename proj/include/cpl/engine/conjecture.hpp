#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpl/core/library.hpp"
#include "cpl/core/statement.hpp"
#include "cpl/llm/gateway.hpp"
#include "cpl/run/event_log.hpp"
#include "cpl/verifier/session.hpp"

namespace cpl {

/// Conjectures accepted during one phase; normalized bodies are unique.
class ConjectureList {
 public:
  const std::vector<TheoremStatement>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  bool contains(const TheoremStatement& stmt) const;

  /// Returns false (and leaves the list unchanged) for a duplicate.
  bool add(const TheoremStatement& stmt);

 private:
  std::vector<TheoremStatement> items_;
};

struct ConjecturePhaseReport {
  std::size_t iterations_run = 0;
  std::size_t raw_candidates = 0;
  std::size_t rejected_parse = 0;
  std::size_t rejected_duplicate = 0;
  std::size_t rejected_invalid = 0;
  std::size_t rejected_known = 0;
  std::size_t failed_calls = 0;  // conjecturer calls lost to transport errors
  ConjectureList accepted;
  std::optional<std::string> aborted;  // set when a fatal error ended the phase

  bool counters_consistent() const;
  nlohmann::json summary() const;
};

struct ConjecturePhaseOptions {
  std::size_t iterations = 16;
  std::size_t context_budget = 400000;
  std::string system_prompt = PromptSet::defaults().conjecturer;
  Sampling sampling;
};

/// Runs the conjecture loop: `iterations` conjecturer calls, each followed
/// by dedup, validity and `exact?` novelty checks of every parsed
/// candidate. Accepted candidates join the list immediately.
ConjecturePhaseReport run_conjecture_phase(const Library& library, VerifierSession& session,
                                           ChatGateway& gateway, const ConjecturePhaseOptions& options,
                                           EventSink& events);

}  // namespace cpl
