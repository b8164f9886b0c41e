#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "cpl/core/proof_length.hpp"
#include "cpl/engine/prover.hpp"
#include "cpl/llm/gateway.hpp"
#include "cpl/verifier/session.hpp"

namespace cpl {

enum class RunMode { cpl, simple_loop, reprove_all, reprove_focused, nl_session, analyze };

std::string to_string(RunMode m);
RunMode run_mode_from_string(std::string_view s);

struct LlmSettings {
  enum class Provider { http, replay, dry_run };
  Provider provider = Provider::http;
  HttpProviderSettings http;
  std::string api_key_env = "OPENAI_API_KEY";
  std::map<Role, Sampling> sampling;  // missing roles use Sampling{}
  RetryPolicy retry;
  double rate_per_second = 1.0;
  std::optional<std::filesystem::path> record_dir;
  std::optional<std::filesystem::path> replay_dir;
  PromptSet prompts = PromptSet::defaults();

  Sampling sampling_for(Role role) const;
};

struct EvalSettings {
  std::size_t focused_repetitions = 128;
  std::size_t focused_prefix = 49;
  std::size_t nl_repetitions = 16;
  PromptVariant reprove_variant = PromptVariant::not_provable;
  PromptVariant focused_variant = PromptVariant::is_false;
  std::string nl_statement =
      "In a topological space, a set is alpha-open if it is a subset of the interior of the closure of "
      "its interior. The intersection of any two alpha-open sets is alpha-open.";
  std::size_t histogram_bin = 10;
};

/// Everything a run needs. The defaults are the published protocol
/// constants: 16 conjecturer calls per phase, 16 proof trials, 30 loops
/// (400 for the simple-loop baseline).
struct RunConfig {
  RunMode mode = RunMode::cpl;
  std::filesystem::path seed_path;
  std::optional<std::size_t> loops;  // unset: mode default
  std::size_t conjecture_iterations = 16;
  std::size_t max_trials = 16;
  std::size_t context_budget = 400000;  // characters
  bool refresh_context_within_loop = false;
  std::size_t workers = 1;
  enum class Clock { automatic, system, logical };
  Clock clock = Clock::automatic;
  LengthMetric length_metric = LengthMetric::lines;
  LlmSettings llm;
  VerifierSettings verifier;
  EvalSettings eval;
  std::filesystem::path output_dir = "run";
  bool resume = false;

  std::size_t effective_loops() const;
  bool logical_clock() const;

  /// Throws ConfigError for contradictory settings.
  void validate() const;
};

inline constexpr std::size_t kDefaultCplLoops = 30;
inline constexpr std::size_t kDefaultSimpleLoopIterations = 400;

/// Applies a JSON config document; relative paths resolve against `base`.
void apply_config(RunConfig& config, const nlohmann::json& doc, const std::filesystem::path& base);
RunConfig load_config(const std::filesystem::path& path);

/// Settings snapshot for the event log (no credentials).
nlohmann::json config_snapshot(const RunConfig& config);

}  // namespace cpl
