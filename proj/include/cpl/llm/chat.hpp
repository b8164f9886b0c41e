#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace cpl {

enum class Role { conjecturer, prover, simple_loop, nl_prover };

inline constexpr Role kAllRoles[] = {Role::conjecturer, Role::prover, Role::simple_loop, Role::nl_prover};

std::string to_string(Role r);
Role role_from_string(std::string_view s);

struct Sampling {
  double temperature = 1.0;
  int max_output = 0;  // 0: let the provider decide
};

struct ChatRequest {
  Role role = Role::conjecturer;
  std::string system_prompt;
  std::string user_content;
  Sampling sampling;
};

struct ChatResponse {
  std::string text;  // may be empty: the prover's "give up" signal
  std::string provider;
  std::chrono::milliseconds latency{0};
  int attempt = 1;
};

/// Drops trailing newlines; whitespace-only text becomes empty.
std::string normalize_completion(std::string_view raw);

/// Default system prompt for each role and prover variant.
struct PromptSet {
  std::string conjecturer;
  std::string prover;        // "not provable" variant
  std::string prover_false;  // "false" variant used for evaluation
  std::string simple_loop;
  std::string nl_prover;

  static PromptSet defaults();
};

}  // namespace cpl
