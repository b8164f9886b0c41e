#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace cpl {

enum class Severity { error, warning, info };

struct Position {
  int line = 1;    // 1-based, relative to the submitted snippet
  int column = 0;  // 0-based
  friend bool operator==(const Position&, const Position&) = default;
};

struct Diagnostic {
  Severity severity = Severity::error;
  Position position;
  std::string message;
  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

enum class Verdict { valid, invalid, verified, failed, novel, known };

struct CheckResult {
  Verdict verdict = Verdict::invalid;
  std::vector<Diagnostic> diagnostics;
  std::optional<std::string> closing_term;  // set iff verdict == known
  std::chrono::milliseconds elapsed{0};

  bool has_error() const;

  /// Throws InvariantError when the verdict/diagnostic/closing-term
  /// relations do not hold.
  void check_invariants() const;

  /// A negative verdict carrying one error diagnostic at 1:0.
  static CheckResult synthetic(Verdict verdict, std::string message);

  friend bool operator==(const CheckResult&, const CheckResult&) = default;
};

std::string to_string(Severity s);
std::string to_string(Verdict v);
Severity severity_from_string(std::string_view s);
Verdict verdict_from_string(std::string_view s);

/// `line:col severity message`
std::string format_diagnostic(const Diagnostic& d);

void to_json(nlohmann::json& j, const Diagnostic& d);
void from_json(const nlohmann::json& j, Diagnostic& d);

/// `elapsed` is not serialized so event logs stay reproducible.
void to_json(nlohmann::json& j, const CheckResult& r);
void from_json(const nlohmann::json& j, CheckResult& r);

}  // namespace cpl
