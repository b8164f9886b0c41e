#include "cpl/verifier/scripted.hpp"

#include <fstream>

#include "cpl/core/text.hpp"

namespace cpl {

namespace {

using Op = ScriptedFixtures::Op;

Op op_from_string(const std::string& s) {
  if (s == "validity") return Op::validity;
  if (s == "novelty") return Op::novelty;
  if (s == "proof") return Op::proof;
  throw ConfigError("scripted fixtures: unknown op '" + s + "'");
}

std::string op_name(Op op) {
  switch (op) {
    case Op::validity:
      return "validity";
    case Op::novelty:
      return "novelty";
    case Op::proof:
      return "proof";
  }
  return "?";
}

Diagnostic sorry_warning() {
  return {Severity::warning, {1, 8}, "declaration uses 'sorry'"};
}

}  // namespace

std::string proof_key(std::string_view proof_text) {
  return text::fnv1a_hex(text::trim(proof_text));
}

void ScriptedFixtures::add(Op op, const std::string& statement_body, CheckResult result,
                           std::optional<std::string> proof_text) {
  std::string hash = proof_text ? proof_key(*proof_text) : "";
  rules[{op, text::collapse_whitespace(statement_body), hash}] = std::move(result);
}

ScriptedFixtures ScriptedFixtures::from_json(const nlohmann::json& doc) {
  ScriptedFixtures f;
  if (doc.contains("defaults")) {
    const auto& d = doc.at("defaults");
    f.default_validity = verdict_from_string(d.value("validity", "valid"));
    f.default_novelty = verdict_from_string(d.value("novelty", "novel"));
    f.default_proof = verdict_from_string(d.value("proof", "failed"));
  }
  f.log_misses = doc.value("log_misses", true);
  f.seed_errors = doc.value("seed_errors", std::vector<Diagnostic>{});
  for (const auto& rule : doc.value("rules", nlohmann::json::array())) {
    Op op = op_from_string(rule.at("op").get<std::string>());
    CheckResult r = rule.get<CheckResult>();
    if ((r.verdict == Verdict::invalid || r.verdict == Verdict::failed) && !r.has_error()) {
      r.diagnostics.push_back({Severity::error, {1, 0}, "scripted " + to_string(r.verdict)});
    }
    if (r.verdict == Verdict::known && !r.closing_term) r.closing_term = "";
    std::string body = text::collapse_whitespace(rule.at("statement").get<std::string>());
    std::string hash;
    if (rule.contains("proof")) hash = proof_key(rule.at("proof").get<std::string>());
    if (rule.contains("proof_hash")) hash = rule.at("proof_hash").get<std::string>();
    f.rules[{op, body, hash}] = std::move(r);
  }
  return f;
}

ScriptedFixtures ScriptedFixtures::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read verifier fixtures " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("verifier fixtures " + path.string() + ": " + e.what());
  }
}

ScriptedSession::ScriptedSession(std::string seed, ScriptedFixtures fixtures)
    : VerifierSession(std::move(seed)), fixtures_(std::move(fixtures)) {
  if (!fixtures_.seed_errors.empty()) {
    throw SessionStartupError("seed does not elaborate", fixtures_.seed_errors);
  }
}

std::optional<CheckResult> ScriptedSession::lookup(Op op, const TheoremStatement& stmt,
                                                   const std::string& proof_hash) const {
  auto key = normalize_statement(stmt);
  if (auto it = fixtures_.rules.find({op, key, proof_hash}); it != fixtures_.rules.end()) {
    return it->second;
  }
  if (!proof_hash.empty()) {
    if (auto it = fixtures_.rules.find({op, key, ""}); it != fixtures_.rules.end()) return it->second;
  }
  return std::nullopt;
}

CheckResult ScriptedSession::fallback(Op op, Verdict verdict, const TheoremStatement& stmt) const {
  if (fixtures_.log_misses) {
    warn("scripted verifier: no " + op_name(op) + " fixture for '" + normalize_statement(stmt) +
         "', using default " + to_string(verdict));
  }
  CheckResult r;
  r.verdict = verdict;
  if (verdict == Verdict::invalid || verdict == Verdict::failed) {
    r.diagnostics.push_back({Severity::error, {1, 0}, "scripted " + to_string(verdict)});
  }
  if (verdict == Verdict::known) r.closing_term = "";
  return r;
}

CheckResult ScriptedSession::do_validity(std::string_view context, const TheoremStatement& stmt) {
  for (const auto& decl : scan_declarations(context)) {
    if (decl.statement.name() == stmt.name()) {
      return CheckResult{Verdict::invalid,
                         {{Severity::error, {1, 8}, "'" + stmt.name() + "' has already been declared"}},
                         std::nullopt,
                         {}};
    }
  }
  auto r = lookup(Op::validity, stmt, "").value_or(fallback(Op::validity, fixtures_.default_validity, stmt));
  if (r.verdict == Verdict::valid && r.diagnostics.empty()) r.diagnostics.push_back(sorry_warning());
  return r;
}

CheckResult ScriptedSession::do_novelty(std::string_view context, const TheoremStatement& stmt) {
  auto key = normalize_statement(stmt);
  for (const auto& decl : scan_declarations(context)) {
    if (normalize_statement(decl.statement) == key) {
      return CheckResult{Verdict::known,
                         {{Severity::info, {1, 0}, "Try this: exact " + decl.statement.name()}},
                         decl.statement.name(),
                         {}};
    }
  }
  return lookup(Op::novelty, stmt, "").value_or(fallback(Op::novelty, fixtures_.default_novelty, stmt));
}

CheckResult ScriptedSession::do_verify(std::string_view, const TheoremStatement& stmt,
                                       const ProofScript& proof) {
  return lookup(Op::proof, stmt, proof_key(proof.text()))
      .value_or(fallback(Op::proof, fixtures_.default_proof, stmt));
}

}  // namespace cpl
