#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <utility>
#include <string>
#include <string_view>
#include <vector>

#include "cpl/core/statement.hpp"
#include "cpl/error.hpp"
#include "cpl/verifier/check_result.hpp"

namespace cpl {

struct VerifierSettings {
  enum class Backend { lean, scripted };
  Backend backend = Backend::scripted;

  // lean backend
  std::vector<std::string> command{"lake", "env", "repl"};
  std::filesystem::path project_dir;  // a Lake project with Mathlib and the REPL
  std::chrono::milliseconds open_timeout{std::chrono::minutes(30)};

  std::chrono::milliseconds command_timeout{std::chrono::seconds(120)};
  std::chrono::milliseconds novelty_timeout{std::chrono::seconds(300)};

  // scripted backend
  std::filesystem::path fixtures;  // empty: built-in defaults only

  std::size_t pool_size = 1;
  bool log_fixture_misses = true;  // scripted backend without a fixture file
};

/// The seed did not elaborate.
class SessionStartupError : public FatalError {
 public:
  SessionStartupError(const std::string& what, std::vector<Diagnostic> diagnostics)
      : FatalError(what), diagnostics_(std::move(diagnostics)) {}
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

using WarningSink = std::function<void(const std::string&)>;

/// A verifier bound to one seed environment. Every check submits the given
/// context (which must begin with the seed) followed by one snippet;
/// diagnostics come back relative to the snippet.
class VerifierSession {
 public:
  virtual ~VerifierSession() = default;

  /// `valid` iff the statement elaborates with no error diagnostics.
  CheckResult check_validity(std::string_view context, const TheoremStatement& stmt);

  /// `known` (with the closing term) iff `exact?` closes the statement in
  /// `context`; `novel` otherwise.
  CheckResult check_novelty(std::string_view context, const TheoremStatement& stmt);

  /// `verified` iff the proof elaborates with no errors and no `sorry`.
  CheckResult verify_proof(std::string_view context, const TheoremStatement& stmt,
                           const ProofScript& proof);

  const std::string& seed_source() const { return seed_; }

  std::size_t validity_calls() const { return validity_calls_; }
  std::size_t novelty_calls() const { return novelty_calls_; }
  std::size_t proof_calls() const { return proof_calls_; }
  std::size_t total_calls() const { return validity_calls_ + novelty_calls_ + proof_calls_; }

  void set_warning_sink(WarningSink sink) { warn_ = std::move(sink); }

 protected:
  explicit VerifierSession(std::string seed) : seed_(std::move(seed)) {}

  virtual CheckResult do_validity(std::string_view context, const TheoremStatement& stmt) = 0;
  virtual CheckResult do_novelty(std::string_view context, const TheoremStatement& stmt) = 0;
  virtual CheckResult do_verify(std::string_view context, const TheoremStatement& stmt,
                                const ProofScript& proof) = 0;

  void warn(const std::string& message) const {
    if (warn_) warn_(message);
  }

 private:
  std::string seed_;
  WarningSink warn_;
  std::atomic<std::size_t> validity_calls_{0};
  std::atomic<std::size_t> novelty_calls_{0};
  std::atomic<std::size_t> proof_calls_{0};
};

/// Failed result for proof text rejected before submission (empty or
/// using `sorry`), or nullopt if the text is acceptable.
std::optional<CheckResult> reject_before_submission(std::string_view proof_text);

/// Opens a session for the configured backend. Throws SessionStartupError
/// when the seed does not elaborate and TransportError when the backend
/// cannot be reached.
std::unique_ptr<VerifierSession> open_session(const VerifierSettings& settings,
                                              const std::string& seed_source);

/// Fixed-size set of sessions over the same seed, for checking
/// independent work concurrently.
class SessionPool {
 public:
  SessionPool(const VerifierSettings& settings, const std::string& seed_source);
  explicit SessionPool(std::vector<std::unique_ptr<VerifierSession>> sessions);

  class Lease {
   public:
    Lease(SessionPool& pool, std::size_t index) : pool_(&pool), index_(index) {}
    Lease(Lease&& other) noexcept : pool_(std::exchange(other.pool_, nullptr)), index_(other.index_) {}
    Lease(const Lease&) = delete;
    ~Lease() {
      if (pool_) pool_->release(index_);
    }
    VerifierSession& operator*() const { return *pool_->sessions_[index_]; }
    VerifierSession* operator->() const { return pool_->sessions_[index_].get(); }

   private:
    SessionPool* pool_;
    std::size_t index_;
  };

  /// Blocks until a session is free.
  Lease acquire();
  std::size_t size() const { return sessions_.size(); }
  VerifierSession& primary() { return *sessions_.front(); }
  void set_warning_sink(const WarningSink& sink);

 private:
  void release(std::size_t index);

  std::vector<std::unique_ptr<VerifierSession>> sessions_;
  std::vector<bool> busy_;
  std::mutex mutex_;
  std::condition_variable cv_;
};

}  // namespace cpl
