#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cpl/core/library.hpp"
#include "cpl/llm/gateway.hpp"
#include "cpl/run/config.hpp"
#include "cpl/run/event_log.hpp"
#include "cpl/verifier/session.hpp"

namespace cpl {

inline constexpr const char* kLibraryFile = "library.lean";
inline constexpr const char* kEventsFile = "events.jsonl";
inline constexpr const char* kTranscriptFile = "transcript.jsonl";
inline constexpr const char* kReportFile = "report.json";

/// Injection points, mostly for tests. Unset members come from the config.
struct RunHooks {
  std::shared_ptr<ChatProvider> provider;
  std::function<std::unique_ptr<SessionPool>(const RunConfig&, const std::string& seed)> sessions;
  std::function<void(const RunEvent&)> after_event;
  Sleeper sleep;
};

/// Gateway, verifier pool and event log for one run directory.
struct RunEnvironment {
  std::shared_ptr<ChatProvider> provider;
  std::unique_ptr<ChatGateway> gateway;
  std::unique_ptr<SessionPool> sessions;
  std::unique_ptr<EventLog> events;
};

std::shared_ptr<ChatProvider> make_provider(const LlmSettings& settings);

/// Where an interrupted run picks up.
struct ResumePlan {
  bool complete = false;         // run_complete already logged
  std::size_t next_loop = 1;     // 1-based
  std::size_t library_size = 0;  // entries to keep
  std::size_t keep_events = 0;   // leading events to keep
  std::map<Role, std::size_t> calls;
};

/// Cross-checks the library file against the `theorem_added` events and
/// finds the last completed loop. Throws ConsistencyError naming the first
/// entry that disagrees with the log.
ResumePlan plan_resume(const std::vector<RunEvent>& events, const Library& on_disk);

/// Rebuilds the library from `theorem_added` events.
Library library_from_events(const std::string& seed, const std::vector<RunEvent>& events);

struct RunResult {
  Library library;
  std::size_t start_loop = 1;
  bool resumed = false;
  bool already_complete = false;
};

/// Runs the configured generation mode (cpl or simple_loop) in
/// `config.output_dir`, resuming when `config.resume` is set.
RunResult run_generation(const RunConfig& config, const RunHooks& hooks = {});

/// The loops themselves; `library` is extended in place and persisted to
/// `library_path` after every addition.
void run_cpl_loops(const RunConfig& config, RunEnvironment& env, Library& library,
                   const std::filesystem::path& library_path, std::size_t first_loop);
void run_simple_loop(const RunConfig& config, RunEnvironment& env, Library& library,
                     const std::filesystem::path& library_path, std::size_t first_iteration);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace cpl
