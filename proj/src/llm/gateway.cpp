#include "cpl/llm/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace cpl {

std::chrono::milliseconds RetryPolicy::delay_after(int attempt) const {
  double ms = static_cast<double>(initial_delay.count()) * std::pow(multiplier, attempt - 1);
  return std::chrono::milliseconds(
      static_cast<long long>(std::min(ms, static_cast<double>(max_delay.count()))));
}

RateLimiter::RateLimiter(double per_second, double burst, Sleeper sleep, NowFn now)
    : rate_(per_second),
      burst_(std::max(1.0, burst)),
      tokens_(std::max(1.0, burst)),
      last_(now()),
      sleep_(std::move(sleep)),
      now_(std::move(now)) {}

void RateLimiter::acquire() {
  if (rate_ <= 0) return;
  std::lock_guard lock(mutex_);
  auto refill = [&] {
    auto t = now_();
    std::chrono::duration<double> dt = t - last_;
    last_ = t;
    tokens_ = std::min(burst_, tokens_ + dt.count() * rate_);
  };
  refill();
  if (tokens_ < 1.0) {
    auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
    sleep_(std::chrono::ceil<std::chrono::milliseconds>(wait));
    refill();
  }
  tokens_ = std::max(0.0, tokens_ - 1.0);
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path) : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::app | std::ios::binary);
  if (!out_) throw FatalError("cannot open " + path.string() + " for writing");
}

void JsonlWriter::append(const nlohmann::json& j) {
  std::lock_guard lock(mutex_);
  out_ << j.dump() << '\n';
  out_.flush();
}

namespace {

void default_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

}  // namespace

ChatGateway::ChatGateway(std::shared_ptr<ChatProvider> provider, Options options)
    : provider_(std::move(provider)),
      options_(std::move(options)),
      limiter_(provider_->remote() ? options_.rate_per_second : 0.0, 1.0,
               options_.sleep ? options_.sleep : Sleeper(default_sleep)) {
  if (!options_.sleep) options_.sleep = default_sleep;
  if (options_.transcript) transcript_ = std::make_unique<JsonlWriter>(*options_.transcript);
  if (options_.record_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*options_.record_dir, ec);
    if (ec || !std::filesystem::is_directory(*options_.record_dir)) {
      throw FatalError("record directory " + options_.record_dir->string() + " is not writable");
    }
    for (auto role : kAllRoles) {
      recorders_[role] = std::make_unique<JsonlWriter>(*options_.record_dir / (to_string(role) + ".jsonl"));
    }
  }
}

std::map<Role, std::size_t> ChatGateway::call_counts() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

void ChatGateway::restore_counts(const std::map<Role, std::size_t>& counts) {
  std::lock_guard lock(mutex_);
  calls_ = counts;
}

std::size_t ChatGateway::calls(Role role) const {
  std::lock_guard lock(mutex_);
  auto it = calls_.find(role);
  return it == calls_.end() ? 0 : it->second;
}

void ChatGateway::log_exchange(const ChatRequest& request, std::size_t role_index, int attempt,
                               const std::string& outcome, const std::string* response,
                               const std::string* error, std::chrono::milliseconds latency) {
  if (!transcript_) return;
  nlohmann::json j{{"role", to_string(request.role)},
                   {"role_index", role_index},
                   {"attempt", attempt},
                   {"outcome", outcome},
                   {"provider", provider_->name()},
                   {"temperature", request.sampling.temperature},
                   {"system_prompt", request.system_prompt},
                   {"user_content", request.user_content},
                   {"latency_ms", latency.count()}};
  if (response) j["response"] = *response;
  if (error) j["error"] = *error;
  {
    std::lock_guard lock(mutex_);
    j["seq"] = exchange_seq_++;
  }
  transcript_->append(j);
}

void ChatGateway::record(Role role, std::size_t role_index, const std::string* response,
                         const std::string* error) {
  if (recorders_.empty()) return;
  nlohmann::json j{{"index", role_index}};
  if (response) j["response"] = *response;
  if (error) j["error"] = *error;
  recorders_.at(role)->append(j);
}

ChatResponse ChatGateway::complete(const ChatRequest& request) {
  std::size_t role_index;
  {
    std::lock_guard lock(mutex_);
    role_index = calls_[request.role]++;
  }
  int max_attempts = std::max(1, options_.retry.max_attempts);
  for (int attempt = 1;; ++attempt) {
    limiter_.acquire();
    auto started = std::chrono::steady_clock::now();
    auto elapsed = [&] {
      return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    };
    try {
      std::string raw = provider_->complete(request);
      std::string text = normalize_completion(raw);
      auto latency = elapsed();
      log_exchange(request, role_index, attempt, "ok", &text, nullptr, latency);
      record(request.role, role_index, &text, nullptr);
      return ChatResponse{std::move(text), provider_->name(), latency, attempt};
    } catch (const RetriesExhausted& e) {
      std::string msg = e.what();
      log_exchange(request, role_index, attempt, "failed", nullptr, &msg, elapsed());
      record(request.role, role_index, nullptr, &msg);
      throw;
    } catch (const TransportError& e) {
      std::string msg = e.what();
      if (attempt >= max_attempts) {
        log_exchange(request, role_index, attempt, "failed", nullptr, &msg, elapsed());
        record(request.role, role_index, nullptr, &msg);
        throw RetriesExhausted("transport failed after " + std::to_string(attempt) + " attempts: " + msg);
      }
      log_exchange(request, role_index, attempt, "retry", nullptr, &msg, elapsed());
      options_.sleep(options_.retry.delay_after(attempt));
    }
  }
}

}  // namespace cpl
