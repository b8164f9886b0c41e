#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpl/verifier/session.hpp"
#include "cpl/verifier/subprocess.hpp"

namespace cpl {

// Wire format of the Lean REPL: one JSON object per request on stdin,
// terminated by a blank line; one JSON object per response on stdout.
namespace repl {

std::string encode_request(std::string_view cmd, std::optional<int> env);

/// End offset of the first complete top-level JSON object in `buffer`
/// (after leading whitespace), or nullopt if it is not complete yet.
std::optional<std::size_t> frame_object(std::string_view buffer);

struct Response {
  std::optional<int> env;
  std::vector<Diagnostic> messages;  // positions relative to the whole command
  std::vector<Position> sorries;
  std::optional<std::string> repl_error;  // `{"message": ...}` replies
};

/// Unknown fields are ignored; a missing `messages` array is empty.
Response decode_response(const nlohmann::json& j);

/// Keeps diagnostics at or after `first_line` and shifts them so that
/// `first_line` becomes line 1. Errors located before the snippet are
/// folded into one error at 1:0.
std::vector<Diagnostic> rebase(const std::vector<Diagnostic>& messages, int first_line);

/// Closing term from an `exact?` suggestion ("Try this: exact foo" → "foo").
std::optional<std::string> closing_term(const std::vector<Diagnostic>& messages);

}  // namespace repl

/// Session backed by a Lean REPL child process. The seed is elaborated once
/// into a base environment; every check runs as a fresh command on top of
/// it, carrying the rest of the context as source text.
class LeanReplSession : public VerifierSession {
 public:
  LeanReplSession(VerifierSettings settings, std::string seed);

 protected:
  CheckResult do_validity(std::string_view context, const TheoremStatement& stmt) override;
  CheckResult do_novelty(std::string_view context, const TheoremStatement& stmt) override;
  CheckResult do_verify(std::string_view context, const TheoremStatement& stmt,
                        const ProofScript& proof) override;

 private:
  struct Outcome {
    bool timed_out = false;
    std::vector<Diagnostic> diagnostics;  // rebased to the snippet
    std::size_t snippet_sorries = 0;
    std::chrono::milliseconds elapsed{0};
  };

  void start();
  repl::Response exchange(const std::string& request, std::chrono::milliseconds timeout, bool& timed_out);
  Outcome run(std::string_view context, const std::string& snippet, std::chrono::milliseconds timeout);

  VerifierSettings settings_;
  std::unique_ptr<Subprocess> process_;
  int base_env_ = 0;
  std::mutex mutex_;
};

}  // namespace cpl
