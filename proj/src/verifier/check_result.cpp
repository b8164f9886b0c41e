#include "cpl/verifier/check_result.hpp"

#include <algorithm>

#include "cpl/error.hpp"

namespace cpl {

bool CheckResult::has_error() const {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::error; });
}

void CheckResult::check_invariants() const {
  if ((verdict == Verdict::known) != closing_term.has_value()) {
    throw InvariantError("closing term must be present exactly for verdict=known");
  }
  if ((verdict == Verdict::invalid || verdict == Verdict::failed) && !has_error()) {
    throw InvariantError("verdict " + to_string(verdict) + " without an error diagnostic");
  }
  if ((verdict == Verdict::valid || verdict == Verdict::verified || verdict == Verdict::known) && has_error()) {
    throw InvariantError("verdict " + to_string(verdict) + " with an error diagnostic");
  }
}

CheckResult CheckResult::synthetic(Verdict verdict, std::string message) {
  CheckResult r;
  r.verdict = verdict;
  r.diagnostics.push_back({Severity::error, {1, 0}, std::move(message)});
  return r;
}

std::string to_string(Severity s) {
  switch (s) {
    case Severity::error:
      return "error";
    case Severity::warning:
      return "warning";
    case Severity::info:
      return "info";
  }
  return "error";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::valid:
      return "valid";
    case Verdict::invalid:
      return "invalid";
    case Verdict::verified:
      return "verified";
    case Verdict::failed:
      return "failed";
    case Verdict::novel:
      return "novel";
    case Verdict::known:
      return "known";
  }
  return "invalid";
}

Severity severity_from_string(std::string_view s) {
  if (s == "error") return Severity::error;
  if (s == "warning") return Severity::warning;
  if (s == "info" || s == "information") return Severity::info;
  throw InvariantError("unknown severity '" + std::string(s) + "'");
}

Verdict verdict_from_string(std::string_view s) {
  for (auto v : {Verdict::valid, Verdict::invalid, Verdict::verified, Verdict::failed,
                 Verdict::novel, Verdict::known}) {
    if (to_string(v) == s) return v;
  }
  throw InvariantError("unknown verdict '" + std::string(s) + "'");
}

std::string format_diagnostic(const Diagnostic& d) {
  return std::to_string(d.position.line) + ":" + std::to_string(d.position.column) + " " +
         to_string(d.severity) + " " + d.message;
}

void to_json(nlohmann::json& j, const Diagnostic& d) {
  j = {{"severity", to_string(d.severity)},
       {"line", d.position.line},
       {"column", d.position.column},
       {"message", d.message}};
}

void from_json(const nlohmann::json& j, Diagnostic& d) {
  d.severity = severity_from_string(j.value("severity", "error"));
  d.position.line = j.value("line", 1);
  d.position.column = j.value("column", 0);
  d.message = j.value("message", "");
}

void to_json(nlohmann::json& j, const CheckResult& r) {
  j = {{"verdict", to_string(r.verdict)}, {"diagnostics", r.diagnostics}};
  if (r.closing_term) j["closing_term"] = *r.closing_term;
}

void from_json(const nlohmann::json& j, CheckResult& r) {
  r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  r.diagnostics = j.value("diagnostics", std::vector<Diagnostic>{});
  if (j.contains("closing_term")) {
    r.closing_term = j.at("closing_term").get<std::string>();
  } else {
    r.closing_term.reset();
  }
}

}  // namespace cpl
