#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpl/core/library.hpp"
#include "cpl/core/statement.hpp"
#include "cpl/llm/gateway.hpp"
#include "cpl/verifier/session.hpp"

namespace cpl {

enum class ProofStatus { verified, failed_exhausted, declared_unprovable };

/// Which surrender condition the prover prompt names: "not provable" (the
/// generation loop) or "false" (evaluation campaigns).
enum class PromptVariant { not_provable, is_false };

std::string to_string(ProofStatus s);
ProofStatus proof_status_from_string(std::string_view s);
std::string to_string(PromptVariant v);
PromptVariant prompt_variant_from_string(std::string_view s);

struct ProofAttempt {
  std::size_t trial = 1;
  std::string proof_text;            // after fence stripping
  std::optional<CheckResult> check;  // absent for an empty response
  bool empty_response = false;
  std::string context_hash;  // FNV-1a of the user content sent for this trial
};

struct ProofOutcome {
  ProofStatus status = ProofStatus::failed_exhausted;
  std::vector<ProofAttempt> attempts;
  std::optional<ProofScript> final_proof;  // present iff verified
  std::string verifier_context;            // library part shared with the model prompt

  nlohmann::json summary() const;
};

struct ProverOptions {
  std::size_t max_trials = 16;
  PromptVariant variant = PromptVariant::not_provable;
  std::size_t context_budget = 400000;
  PromptSet prompts = PromptSet::defaults();
  Sampling sampling;
};

/// User content for one trial: the rendered context, followed for retries
/// by a `previous attempt:` block and an `errors:` block.
std::string prover_user_content(std::string_view context, const ProofAttempt* previous);

/// Bounded proof search with verifier feedback. Returns as soon as a proof
/// verifies or the model answers with an empty response.
ProofOutcome prove(const TheoremStatement& conjecture, const Library& library, VerifierSession& session,
                   ChatGateway& gateway, const ProverOptions& options);

}  // namespace cpl
