#include "cpl/engine/prover.hpp"

#include "cpl/core/text.hpp"

namespace cpl {

std::string to_string(ProofStatus s) {
  switch (s) {
    case ProofStatus::verified:
      return "verified";
    case ProofStatus::failed_exhausted:
      return "failed_exhausted";
    case ProofStatus::declared_unprovable:
      return "declared_unprovable";
  }
  return "failed_exhausted";
}

ProofStatus proof_status_from_string(std::string_view s) {
  for (auto v : {ProofStatus::verified, ProofStatus::failed_exhausted, ProofStatus::declared_unprovable}) {
    if (to_string(v) == s) return v;
  }
  throw ConsistencyError("unknown proof status '" + std::string(s) + "'");
}

std::string to_string(PromptVariant v) { return v == PromptVariant::not_provable ? "not_provable" : "false"; }

PromptVariant prompt_variant_from_string(std::string_view s) {
  if (s == "not_provable" || s == "not-provable") return PromptVariant::not_provable;
  if (s == "false") return PromptVariant::is_false;
  throw ConfigError("unknown prompt variant '" + std::string(s) + "' (expected not_provable|false)");
}

nlohmann::json ProofOutcome::summary() const {
  nlohmann::json j{{"status", to_string(status)}, {"attempts", attempts.size()}};
  if (final_proof) j["proof"] = final_proof->text();
  return j;
}

std::string prover_user_content(std::string_view context, const ProofAttempt* previous) {
  std::string out(context);
  if (!previous) return out;
  out += "\nprevious attempt:\n";
  out += previous->proof_text;
  out += "\n\nerrors:\n";
  if (previous->check) {
    for (const auto& d : previous->check->diagnostics) out += format_diagnostic(d) + "\n";
  }
  return out;
}

ProofOutcome prove(const TheoremStatement& conjecture, const Library& library, VerifierSession& session,
                   ChatGateway& gateway, const ProverOptions& options) {
  const std::string& system_prompt =
      options.variant == PromptVariant::is_false ? options.prompts.prover_false : options.prompts.prover;
  auto rendered = render_context(library, std::span(&conjecture, 1), options.context_budget);

  ProofOutcome outcome;
  outcome.verifier_context = rendered.library_part();
  std::size_t max_trials = std::max<std::size_t>(1, options.max_trials);
  for (std::size_t trial = 1; trial <= max_trials; ++trial) {
    ProofAttempt attempt;
    attempt.trial = trial;
    const ProofAttempt* previous = outcome.attempts.empty() ? nullptr : &outcome.attempts.back();
    auto user = prover_user_content(rendered.text, previous);
    attempt.context_hash = text::fnv1a_hex(user);

    std::string response;
    try {
      response = gateway.complete({Role::prover, system_prompt, user, options.sampling}).text;
    } catch (const FatalError&) {
      throw;
    } catch (const TransportError& e) {
      attempt.check = CheckResult::synthetic(Verdict::failed, std::string("transport: ") + e.what());
      outcome.attempts.push_back(std::move(attempt));
      continue;
    }

    attempt.proof_text = std::string(text::trim(strip_code_fences(response).text));
    if (attempt.proof_text.empty()) {
      attempt.empty_response = true;
      outcome.attempts.push_back(std::move(attempt));
      outcome.status = ProofStatus::declared_unprovable;
      return outcome;
    }

    if (auto rejected = reject_before_submission(attempt.proof_text)) {
      attempt.check = std::move(*rejected);
    } else {
      ProofScript proof(attempt.proof_text);
      try {
        attempt.check = session.verify_proof(outcome.verifier_context, conjecture, proof);
      } catch (const TransportError& e) {
        attempt.check = CheckResult::synthetic(Verdict::failed, std::string("verifier transport: ") + e.what());
      }
      if (attempt.check->verdict == Verdict::verified) {
        outcome.attempts.push_back(std::move(attempt));
        outcome.status = ProofStatus::verified;
        outcome.final_proof = std::move(proof);
        return outcome;
      }
    }
    outcome.attempts.push_back(std::move(attempt));
  }
  outcome.status = ProofStatus::failed_exhausted;
  return outcome;
}

}  // namespace cpl
