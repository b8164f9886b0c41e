#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include <nlohmann/json.hpp>

#include "cpl/llm/chat.hpp"
#include "cpl/llm/provider.hpp"

namespace cpl {

using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct RetryPolicy {
  int max_attempts = 4;  // including the first
  std::chrono::milliseconds initial_delay{1000};
  double multiplier = 2.0;
  std::chrono::milliseconds max_delay{30000};

  /// Delay before attempt `attempt + 1`.
  std::chrono::milliseconds delay_after(int attempt) const;
};

/// Token bucket shared by every call through the gateway.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;
  using NowFn = std::function<Clock::time_point()>;

  /// `per_second <= 0` disables limiting.
  RateLimiter(double per_second, double burst, Sleeper sleep, NowFn now = Clock::now);
  void acquire();

 private:
  double rate_;
  double burst_;
  double tokens_;
  Clock::time_point last_;
  Sleeper sleep_;
  NowFn now_;
  std::mutex mutex_;
};

/// Append-only JSON-lines file, one object per line, flushed per write.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path);
  void append(const nlohmann::json& j);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::mutex mutex_;
};

/// Uniform chat interface: retry with exponential backoff, rate limiting,
/// transcript logging and optional recording for later replay.
class ChatGateway {
 public:
  struct Options {
    RetryPolicy retry;
    double rate_per_second = 1.0;  // applied to remote providers only
    std::optional<std::filesystem::path> transcript;
    std::optional<std::filesystem::path> record_dir;
    Sleeper sleep;  // default: std::this_thread::sleep_for
  };

  ChatGateway(std::shared_ptr<ChatProvider> provider, Options options);

  /// Throws TransportError once retries are exhausted and FatalError for
  /// non-retryable problems.
  ChatResponse complete(const ChatRequest& request);

  /// Completed calls per role (successful or not), i.e. the replay index of
  /// the next call.
  std::map<Role, std::size_t> call_counts() const;
  std::size_t calls(Role role) const;
  /// Continues role indices from `counts` (resumption).
  void restore_counts(const std::map<Role, std::size_t>& counts);

  ChatProvider& provider() { return *provider_; }

 private:
  void log_exchange(const ChatRequest& request, std::size_t role_index, int attempt,
                    const std::string& outcome, const std::string* response, const std::string* error,
                    std::chrono::milliseconds latency);
  void record(Role role, std::size_t role_index, const std::string* response, const std::string* error);

  std::shared_ptr<ChatProvider> provider_;
  Options options_;
  RateLimiter limiter_;
  std::unique_ptr<JsonlWriter> transcript_;
  std::map<Role, std::unique_ptr<JsonlWriter>> recorders_;
  std::map<Role, std::size_t> calls_;
  std::size_t exchange_seq_ = 0;
  mutable std::mutex mutex_;
};

}  // namespace cpl
