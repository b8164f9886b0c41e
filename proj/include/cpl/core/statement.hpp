#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cpl {

/// A Lean `theorem` declaration whose proof is elided as `sorry`.
///
/// `body` is the signature after the name: when the declaration has binders
/// it is kept verbatim including them (`{A : Set X} (h : P A) : Q A`),
/// otherwise it is just the type after the colon (`1 = 1`).
class TheoremStatement {
 public:
  /// Parses exactly one `theorem ... := sorry` declaration. Throws
  /// InvariantError otherwise.
  static TheoremStatement parse(std::string_view declaration);

  /// Builds `theorem <name> : <type> := sorry`.
  static TheoremStatement from_type(std::string name, std::string type);

  const std::string& name() const { return name_; }
  const std::string& body() const { return body_; }
  const std::string& source_text() const { return source_text_; }
  bool has_binders() const { return has_binders_; }

  /// Same statement under a different name.
  TheoremStatement renamed(const std::string& new_name) const;

  /// The declaration with `sorry` replaced by `proof`.
  std::string with_proof(std::string_view proof) const;

  /// `example <signature> := <proof>`: the anonymous form of the statement.
  std::string as_example(std::string_view proof) const;

  friend bool operator==(const TheoremStatement&, const TheoremStatement&) = default;

 private:
  friend struct DeclarationScanner;
  TheoremStatement(std::string name, std::string body, std::string head, bool has_binders);

  std::string name_;
  std::string body_;
  std::string head_;  // declaration text up to and including `:=`
  std::string source_text_;
  bool has_binders_ = false;
};

/// Proof text that directly follows `:=`: a `by` block or a term.
/// Surrounding whitespace is trimmed on construction.
class ProofScript {
 public:
  /// Throws InvariantError for empty text or text using `sorry`.
  explicit ProofScript(std::string_view text);

  /// Reason `text` cannot be a proof script, if any.
  static std::optional<std::string> violation(std::string_view text);

  const std::string& text() const { return text_; }

  friend bool operator==(const ProofScript&, const ProofScript&) = default;

 private:
  std::string text_;
};

struct SkippedDeclaration {
  std::string text;
  std::string reason;
};

struct ParseResult {
  std::vector<TheoremStatement> statements;
  std::vector<SkippedDeclaration> skipped;
  std::vector<std::string> warnings;
};

/// Extracts every `theorem ... := sorry` declaration from model output.
/// Code fences are stripped first; prose is ignored; declarations with any
/// other proof are reported in `skipped`.
ParseResult parse_theorem_declarations(std::string_view text);

/// A declaration with an arbitrary proof, as found in a library file or in
/// a simple-loop response.
struct ProvedDeclaration {
  TheoremStatement statement;
  std::string proof_text;  // trimmed; may be empty or contain `sorry`
};

/// Parses the first `theorem` declaration in `text`, taking everything after
/// its top-level `:=` up to the next line-initial `theorem` as the proof.
std::optional<ProvedDeclaration> parse_proved_declaration(std::string_view text);

/// Names and bodies of every `theorem` declaration in `text`, whatever their
/// proofs. Used to inspect rendered contexts.
std::vector<ProvedDeclaration> scan_declarations(std::string_view text);

/// Canonical dedup key: body with whitespace runs collapsed, name excluded.
std::string normalize_statement(const TheoremStatement& stmt);

struct StrippedText {
  std::string text;
  std::vector<std::string> warnings;
};

/// Removes Markdown fence delimiter lines (``` or ~~~, optional language
/// tag) and keeps everything else.
StrippedText strip_code_fences(std::string_view text);

}  // namespace cpl
