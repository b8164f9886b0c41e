#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace cpl {

enum class EventKind {
  run_start,
  phase_start,
  conjecture_accepted,
  conjecture_rejected,
  phase_report,
  proof_attempt,
  proof_complete,
  theorem_added,
  loop_complete,
  run_complete,
  reprove_result,
  nl_response,
  warning,
};

std::string to_string(EventKind k);
EventKind event_kind_from_string(std::string_view s);

struct RunEvent {
  std::int64_t sequence = 0;
  std::string timestamp;
  EventKind kind = EventKind::warning;
  nlohmann::json payload;
};

nlohmann::json to_json(const RunEvent& e);
RunEvent event_from_json(const nlohmann::json& j);

/// Receives pipeline events. Engines write through this interface so tests
/// can capture events in memory.
class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void emit(EventKind kind, nlohmann::json payload) = 0;
  /// Timestamp the next event will carry.
  virtual std::string next_timestamp() = 0;
};

/// Maps an event sequence number to its timestamp.
using TimestampSource = std::function<std::string(std::int64_t sequence)>;

/// Wall-clock UTC, ISO-8601 with milliseconds.
TimestampSource system_timestamps();

/// Deterministic timestamps: 1970-01-01T00:00:00Z plus `sequence` seconds.
/// Used for replay runs so repeated runs are byte-identical.
TimestampSource logical_timestamps();

std::string iso8601_utc(std::chrono::system_clock::time_point t, bool millis);

/// The append-only `events.jsonl` file. Sequence numbers continue from the
/// last event already in the file.
class EventLog : public EventSink {
 public:
  EventLog(const std::filesystem::path& path, TimestampSource timestamps);

  void emit(EventKind kind, nlohmann::json payload) override;
  std::string next_timestamp() override;

  std::int64_t last_sequence() const { return next_sequence_ - 1; }
  const std::filesystem::path& path() const { return path_; }

  /// Called after every event is durably written (test hook).
  void set_after_emit(std::function<void(const RunEvent&)> hook) { after_emit_ = std::move(hook); }

  static std::vector<RunEvent> read(const std::filesystem::path& path);

  /// Atomically rewrites `path` keeping only `events`.
  static void rewrite(const std::filesystem::path& path, const std::vector<RunEvent>& events);

 private:
  std::filesystem::path path_;
  TimestampSource timestamps_;
  std::ofstream out_;
  std::int64_t next_sequence_ = 0;
  std::function<void(const RunEvent&)> after_emit_;
  std::mutex mutex_;
};

/// Collects events in memory.
class MemorySink : public EventSink {
 public:
  void emit(EventKind kind, nlohmann::json payload) override;
  std::string next_timestamp() override;
  const std::vector<RunEvent>& events() const { return events_; }
  std::size_t count(EventKind kind) const;

 private:
  std::vector<RunEvent> events_;
  TimestampSource timestamps_ = logical_timestamps();
};

/// Adds fixed fields (e.g. the loop number) to every payload.
class TaggedSink : public EventSink {
 public:
  TaggedSink(EventSink& inner, nlohmann::json tags) : inner_(inner), tags_(std::move(tags)) {}
  void emit(EventKind kind, nlohmann::json payload) override;
  std::string next_timestamp() override { return inner_.next_timestamp(); }

 private:
  EventSink& inner_;
  nlohmann::json tags_;
};

/// Replaces every `timestamp` and `created_at` value so logs from different
/// runs can be compared.
std::string normalize_timestamps(std::string_view jsonl);

}  // namespace cpl
