#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>

#include <nlohmann/json.hpp>

#include "cpl/verifier/session.hpp"

namespace cpl {

/// Offline stand-in for the Lean server: verdicts come from a fixture map
/// keyed by (operation, normalized statement, proof hash).
///
/// Fixture document:
///
///     {
///       "defaults": {"validity": "valid", "novelty": "novel", "proof": "failed"},
///       "log_misses": true,
///       "seed_errors": [{"severity": "error", "line": 1, "column": 0, "message": "..."}],
///       "rules": [
///         {"op": "validity", "statement": "<body>", "verdict": "invalid",
///          "diagnostics": [...]},
///         {"op": "novelty", "statement": "<body>", "verdict": "known", "closing_term": "..."},
///         {"op": "proof", "statement": "<body>", "proof": "<text>", "verdict": "verified"},
///         {"op": "proof", "statement": "<body>", "proof_hash": "<fnv1a>", "verdict": "failed"}
///       ]
///     }
///
/// A proof rule without `proof`/`proof_hash` matches any proof. On top of
/// the map the session emulates two Lean behaviours: redeclaring a name
/// already in the context is invalid, and a statement whose normalized body
/// equals a declaration in the context is known by that declaration.
struct ScriptedFixtures {
  enum class Op { validity, novelty, proof };

  Verdict default_validity = Verdict::valid;
  Verdict default_novelty = Verdict::novel;
  Verdict default_proof = Verdict::failed;
  bool log_misses = true;
  std::vector<Diagnostic> seed_errors;

  // proof hash is "" for validity/novelty rules and for any-proof rules
  std::map<std::tuple<Op, std::string, std::string>, CheckResult> rules;

  static ScriptedFixtures from_json(const nlohmann::json& doc);
  static ScriptedFixtures load(const std::filesystem::path& path);

  void add(Op op, const std::string& statement_body, CheckResult result,
           std::optional<std::string> proof_text = std::nullopt);
};

/// Proof-text key used by fixture rules.
std::string proof_key(std::string_view proof_text);

class ScriptedSession : public VerifierSession {
 public:
  /// Throws SessionStartupError if the fixtures declare seed errors.
  ScriptedSession(std::string seed, ScriptedFixtures fixtures);

 protected:
  CheckResult do_validity(std::string_view context, const TheoremStatement& stmt) override;
  CheckResult do_novelty(std::string_view context, const TheoremStatement& stmt) override;
  CheckResult do_verify(std::string_view context, const TheoremStatement& stmt,
                        const ProofScript& proof) override;

 private:
  std::optional<CheckResult> lookup(ScriptedFixtures::Op op, const TheoremStatement& stmt,
                                    const std::string& proof_hash) const;
  CheckResult fallback(ScriptedFixtures::Op op, Verdict verdict, const TheoremStatement& stmt) const;

  ScriptedFixtures fixtures_;
};

}  // namespace cpl
