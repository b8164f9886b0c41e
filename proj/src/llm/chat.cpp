#include "cpl/llm/chat.hpp"

#include "cpl/core/text.hpp"
#include "cpl/error.hpp"

namespace cpl {

std::string to_string(Role r) {
  switch (r) {
    case Role::conjecturer:
      return "conjecturer";
    case Role::prover:
      return "prover";
    case Role::simple_loop:
      return "simple_loop";
    case Role::nl_prover:
      return "nl_prover";
  }
  return "conjecturer";
}

Role role_from_string(std::string_view s) {
  for (auto r : kAllRoles) {
    if (to_string(r) == s) return r;
  }
  throw ConfigError("unknown role '" + std::string(s) + "'");
}

std::string normalize_completion(std::string_view raw) {
  if (text::trim(raw).empty()) return "";
  while (!raw.empty() && (raw.back() == '\n' || raw.back() == '\r')) raw.remove_suffix(1);
  return std::string(raw);
}

PromptSet PromptSet::defaults() {
  PromptSet p;
  p.conjecturer =
      "Your are a writer of mathlib4 library. Please generate conjectures of new theorems in Lean 4 "
      "format, which do not need to be definitely true, following a given library. Do not generate "
      "statements that are already on the list. Do not include proofs, annotations, or imports. The "
      "new theorems begin with 'theorem', not any annotions. They should end with ':= sorry'. "
      "Additionally, please use standard mathematical symbols (e.g., ∀, ∃, √) instead "
      "of Unicode escape sequences (e.g., \\u2200).";
  p.prover =
      "You are a prover of mathlib4 library. Please prove the last theorem in the given content in "
      "Lean 4 format. You should write the Lean4 code which directly follows \":=\" in the last "
      "theorem. It should begin with 'by' or represent a term directly. You can use the theorems in "
      "the given content as lemmas. Do not use sorry in the proof. If you judge that the theorem is "
      "not provable, please return empty string instead of the proof. Do not include any other text.";
  p.prover_false =
      "You are a prover of mathlib4 library. Please prove the last theorem in the given content in "
      "Lean 4 format. You should write the Lean4 code which directly follows \":=\" in the last "
      "theorem. It should begin with 'by' or represent a term directly. You can use the theorems in "
      "the given content as lemmas. Do not use sorry in the proof. If you judge that the theorem is "
      "false, please return empty string instead of the proof. Do not include any other text.";
  p.simple_loop =
      "Your are a writer of mathlib4 library.\n"
      "Please generate a new theorem with a proof in Lean 4 format, following a given library.\n"
      "Do not return anything else than the Lean 4 code.\n"
      "The generated code should follow the given library.\n"
      "The generated code should contain only the theorem and the proof.\n"
      "Do not generate a theorem that are already on the library.\n"
      "The new theorem should begin with 'theorem', not any annotions.\n"
      "You can use the theorems in the given library as lemmas in the proof.\n"
      "Do not use sorry in the proof.\n"
      "Additionally, please use standard mathematical symbols (e.g., ∀, ∃, √) instead "
      "of Unicode escape sequences (e.g., \\u2200).";
  p.nl_prover =
      "Please prove the following theorem. If you judge that the theorem is false, please return "
      "\"False\" instead of the proof.";
  return p;
}

}  // namespace cpl
