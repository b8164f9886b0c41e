#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpl/core/library.hpp"
#include "cpl/engine/prover.hpp"
#include "cpl/eval/fraction.hpp"
#include "cpl/run/event_log.hpp"

namespace cpl {

enum class ReproveMode { with_context, definitions_only };

std::string to_string(ReproveMode m);
ReproveMode reprove_mode_from_string(std::string_view s);

struct ReproveItem {
  std::size_t sequence_index = 0;  // library entry, or repetition for focused campaigns
  std::string name;
  ProofStatus status = ProofStatus::failed_exhausted;
  std::size_t attempts = 0;
  std::size_t context_entries = 0;  // library entries visible to the prover
  std::string context_hash;         // FNV-1a of the verifier context
  bool transport_failure = false;

  friend bool operator==(const ReproveItem&, const ReproveItem&) = default;
};

struct ReproveReport {
  std::string campaign;  // "reprove_all" or "reprove_focused"
  ReproveMode mode = ReproveMode::with_context;
  std::vector<ReproveItem> per_theorem;

  std::size_t total() const { return per_theorem.size(); }
  std::size_t count(ProofStatus s) const;
  std::size_t success_count() const { return count(ProofStatus::verified); }
  Fraction success_rate() const { return {success_count(), total()}; }
  std::size_t transport_failures() const;

  nlohmann::json to_json() const;
  static ReproveReport from_events(const std::vector<RunEvent>& events, std::string_view campaign, ReproveMode mode);
};

struct ReproveOptions {
  ProverOptions prover;  // variant, trials, prompts, budget
  std::size_t workers = 1;
};

class SessionPool;
class ChatGateway;

/// Re-proves every library entry. With context, entry i sees the seed and
/// entries [0, i); definitions-only runs see the seed alone.
ReproveReport reprove_all(const Library& library, ReproveMode mode, SessionPool& sessions, ChatGateway& gateway,
                          const ReproveOptions& options, EventSink& events);

/// `n` independent campaigns on one statement. `prefix` is the library the
/// with-context setting uses.
ReproveReport reprove_focused(const TheoremStatement& statement, const Library& prefix, std::size_t n,
                              ReproveMode mode, SessionPool& sessions, ChatGateway& gateway,
                              const ReproveOptions& options, EventSink& events);

}  // namespace cpl
