#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cpl/error.hpp"
#include "cpl/llm/chat.hpp"

namespace cpl {

/// A transport failure that already went through its retry budget. The
/// gateway passes it through without retrying again.
class RetriesExhausted : public TransportError {
 public:
  using TransportError::TransportError;
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string name() const = 0;

  /// Raw completion text. Throws TransportError for retryable failures and
  /// FatalError for configuration or authentication problems.
  virtual std::string complete(const ChatRequest& request) = 0;

  /// Remote providers are paced by the gateway's rate limiter.
  virtual bool remote() const { return false; }
};

/// One recorded exchange: either a response or the error that ended the
/// call after retries.
struct ReplayEntry {
  std::optional<std::string> response;
  std::optional<std::string> error;
};

/// Serves recorded responses keyed by (role, per-role call index).
///
/// On disk a session directory holds one `<role>.jsonl` file per role, one
/// JSON object per call: `{"index": i, "response": "..."}` or
/// `{"index": i, "error": "..."}`. A missing file is an empty queue.
class ReplayProvider : public ChatProvider {
 public:
  explicit ReplayProvider(std::map<Role, std::vector<ReplayEntry>> queues);
  static std::shared_ptr<ReplayProvider> load(const std::filesystem::path& dir);

  std::string name() const override { return "replay"; }
  std::string complete(const ChatRequest& request) override;

  /// Skips the first `counts[role]` entries of each queue (resumption).
  void fast_forward(const std::map<Role, std::size_t>& counts);
  std::size_t position(Role role) const;

 private:
  std::map<Role, std::vector<ReplayEntry>> queues_;
  std::map<Role, std::size_t> next_;
  mutable std::mutex mutex_;
};

/// Instant synthetic provider for dry runs: the conjecturer emits one fresh
/// statement per call, the prover and simple-loop writer emit proofs the
/// default scripted verifier rejects, the natural-language prover answers
/// "False".
class DryRunProvider : public ChatProvider {
 public:
  std::string name() const override { return "dry-run"; }
  std::string complete(const ChatRequest& request) override;

 private:
  std::map<Role, std::size_t> calls_;
  std::mutex mutex_;
};

struct HttpProviderSettings {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::map<Role, std::string> models{{Role::conjecturer, "gpt-4o"},
                                     {Role::prover, "o3"},
                                     {Role::simple_loop, "o3"},
                                     {Role::nl_prover, "gpt-4o"}};
  std::string api_key;  // never logged
  std::chrono::seconds timeout{600};
};

/// Chat-completions over HTTP(S): `{"model", "messages", "temperature"}` in,
/// `choices[0].message.content` out.
class HttpChatProvider : public ChatProvider {
 public:
  explicit HttpChatProvider(HttpProviderSettings settings);

  std::string name() const override { return "http"; }
  std::string complete(const ChatRequest& request) override;
  bool remote() const override { return true; }

  /// Request body for `request` (exposed for tests).
  std::string request_body(const ChatRequest& request) const;

 private:
  HttpProviderSettings settings_;
  std::string base_;  // scheme://host[:port]
  std::string path_;
};

}  // namespace cpl
