#include "cpl/run/event_log.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "cpl/error.hpp"

namespace cpl {

namespace {

constexpr std::pair<EventKind, std::string_view> kKindNames[] = {
    {EventKind::run_start, "run_start"},
    {EventKind::phase_start, "phase_start"},
    {EventKind::conjecture_accepted, "conjecture_accepted"},
    {EventKind::conjecture_rejected, "conjecture_rejected"},
    {EventKind::phase_report, "phase_report"},
    {EventKind::proof_attempt, "proof_attempt"},
    {EventKind::proof_complete, "proof_complete"},
    {EventKind::theorem_added, "theorem_added"},
    {EventKind::loop_complete, "loop_complete"},
    {EventKind::run_complete, "run_complete"},
    {EventKind::reprove_result, "reprove_result"},
    {EventKind::nl_response, "nl_response"},
    {EventKind::warning, "warning"},
};

}  // namespace

std::string to_string(EventKind k) {
  for (auto [kind, name] : kKindNames) {
    if (kind == k) return std::string(name);
  }
  return "warning";
}

EventKind event_kind_from_string(std::string_view s) {
  for (auto [kind, name] : kKindNames) {
    if (name == s) return kind;
  }
  throw ConsistencyError("unknown event kind '" + std::string(s) + "'");
}

nlohmann::json to_json(const RunEvent& e) {
  return {{"sequence", e.sequence}, {"timestamp", e.timestamp}, {"kind", to_string(e.kind)}, {"payload", e.payload}};
}

RunEvent event_from_json(const nlohmann::json& j) {
  RunEvent e;
  e.sequence = j.at("sequence").get<std::int64_t>();
  e.timestamp = j.value("timestamp", "");
  e.kind = event_kind_from_string(j.at("kind").get<std::string>());
  e.payload = j.value("payload", nlohmann::json::object());
  return e;
}

std::string iso8601_utc(std::chrono::system_clock::time_point t, bool millis) {
  auto secs = std::chrono::floor<std::chrono::seconds>(t);
  std::time_t tt = std::chrono::system_clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  std::string out = buf;
  if (millis) {
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(t - secs).count();
    char frac[24];
    std::snprintf(frac, sizeof frac, ".%03lld", static_cast<long long>(ms));
    out += frac;
  }
  return out + "Z";
}

TimestampSource system_timestamps() {
  return [](std::int64_t) { return iso8601_utc(std::chrono::system_clock::now(), true); };
}

TimestampSource logical_timestamps() {
  return [](std::int64_t seq) {
    return iso8601_utc(std::chrono::system_clock::time_point(std::chrono::seconds(seq)), false);
  };
}

EventLog::EventLog(const std::filesystem::path& path, TimestampSource timestamps)
    : path_(path), timestamps_(std::move(timestamps)) {
  if (std::filesystem::exists(path)) {
    auto existing = read(path);
    if (!existing.empty()) next_sequence_ = existing.back().sequence + 1;
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::app | std::ios::binary);
  if (!out_) throw FatalError("cannot open event log " + path.string());
}

std::string EventLog::next_timestamp() {
  std::lock_guard lock(mutex_);
  return timestamps_(next_sequence_);
}

void EventLog::emit(EventKind kind, nlohmann::json payload) {
  RunEvent e;
  {
    std::lock_guard lock(mutex_);
    e.sequence = next_sequence_++;
    e.timestamp = timestamps_(e.sequence);
    e.kind = kind;
    e.payload = std::move(payload);
    out_ << to_json(e).dump() << '\n';
    out_.flush();
    if (!out_) throw FatalError("write to event log " + path_.string() + " failed");
  }
  if (after_emit_) after_emit_(e);
}

std::vector<RunEvent> EventLog::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read event log " + path.string());
  std::vector<RunEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      events.push_back(event_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      // A torn final line is what a crash mid-write leaves behind.
      if (in.peek() == EOF) break;
      throw ConsistencyError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (events.size() > 1 && events.back().sequence <= events[events.size() - 2].sequence) {
      throw ConsistencyError(path.string() + ":" + std::to_string(line_no) + ": sequence not increasing");
    }
  }
  return events;
}

void EventLog::rewrite(const std::filesystem::path& path, const std::vector<RunEvent>& events) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    for (const auto& e : events) out << to_json(e).dump() << '\n';
    if (!out) throw FatalError("cannot rewrite event log " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

void MemorySink::emit(EventKind kind, nlohmann::json payload) {
  auto seq = static_cast<std::int64_t>(events_.size());
  events_.push_back({seq, timestamps_(seq), kind, std::move(payload)});
}

std::string MemorySink::next_timestamp() { return timestamps_(static_cast<std::int64_t>(events_.size())); }

std::size_t MemorySink::count(EventKind kind) const {
  std::size_t n = 0;
  for (const auto& e : events_) n += e.kind == kind;
  return n;
}

void TaggedSink::emit(EventKind kind, nlohmann::json payload) {
  for (const auto& [k, v] : tags_.items()) payload[k] = v;
  inner_.emit(kind, std::move(payload));
}

std::string normalize_timestamps(std::string_view jsonl) {
  std::ostringstream out;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  auto scrub = [](auto& self, nlohmann::json& j) -> void {
    if (j.is_object()) {
      for (auto& [k, v] : j.items()) {
        if ((k == "timestamp" || k == "created_at") && v.is_string()) {
          v = "<timestamp>";
        } else {
          self(self, v);
        }
      }
    } else if (j.is_array()) {
      for (auto& v : j) self(self, v);
    }
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    scrub(scrub, j);
    out << j.dump() << '\n';
  }
  return out.str();
}

}  // namespace cpl
