#include "cpl/run/config.hpp"

#include <fstream>

namespace cpl {

std::string to_string(RunMode m) {
  switch (m) {
    case RunMode::cpl:
      return "cpl";
    case RunMode::simple_loop:
      return "simple_loop";
    case RunMode::reprove_all:
      return "reprove_all";
    case RunMode::reprove_focused:
      return "reprove_focused";
    case RunMode::nl_session:
      return "nl_session";
    case RunMode::analyze:
      return "analyze";
  }
  return "cpl";
}

RunMode run_mode_from_string(std::string_view s) {
  for (auto m : {RunMode::cpl, RunMode::simple_loop, RunMode::reprove_all, RunMode::reprove_focused,
                 RunMode::nl_session, RunMode::analyze}) {
    auto name = to_string(m);
    std::string dashed = name;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    if (s == name || s == dashed) return m;
  }
  throw ConfigError("unknown mode '" + std::string(s) + "'");
}

Sampling LlmSettings::sampling_for(Role role) const {
  auto it = sampling.find(role);
  return it == sampling.end() ? Sampling{} : it->second;
}

std::size_t RunConfig::effective_loops() const {
  if (loops) return *loops;
  return mode == RunMode::simple_loop ? kDefaultSimpleLoopIterations : kDefaultCplLoops;
}

bool RunConfig::logical_clock() const {
  if (clock == Clock::automatic) return llm.provider != LlmSettings::Provider::http;
  return clock == Clock::logical;
}

void RunConfig::validate() const {
  if (effective_loops() == 0) throw ConfigError("loops must be positive");
  if (conjecture_iterations == 0) throw ConfigError("conjecture_iterations must be positive");
  if (max_trials == 0) throw ConfigError("max_trials must be positive");
  if (workers == 0) throw ConfigError("workers must be positive");
  if (llm.provider == LlmSettings::Provider::replay && !llm.replay_dir) {
    throw ConfigError("replay provider needs a replay directory (--replay <dir>)");
  }
  if (llm.provider == LlmSettings::Provider::replay && workers > 1) {
    throw ConfigError("replay keys on per-role call order; run replays with workers = 1");
  }
  if (llm.record_dir && llm.replay_dir && llm.provider == LlmSettings::Provider::replay) {
    throw ConfigError("--record and --replay are mutually exclusive");
  }
  if (workers > 1 && refresh_context_within_loop) {
    throw ConfigError("within-loop context refresh serializes proving; use workers = 1");
  }
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

std::chrono::milliseconds seconds_field(const nlohmann::json& j, const char* key, std::chrono::milliseconds dflt) {
  if (!j.contains(key)) return dflt;
  return std::chrono::milliseconds(static_cast<long long>(j[key].get<double>() * 1000));
}

}  // namespace

void apply_config(RunConfig& c, const nlohmann::json& doc, const std::filesystem::path& base) {
  try {
    if (doc.contains("mode")) c.mode = run_mode_from_string(doc["mode"].get<std::string>());
    if (doc.contains("seed")) c.seed_path = resolve(base, doc["seed"].get<std::string>());
    if (doc.contains("loops") && !doc["loops"].is_null()) c.loops = doc["loops"].get<std::size_t>();
    read(doc, "conjecture_iterations", c.conjecture_iterations);
    read(doc, "max_trials", c.max_trials);
    read(doc, "context_budget", c.context_budget);
    read(doc, "refresh_context_within_loop", c.refresh_context_within_loop);
    read(doc, "workers", c.workers);
    if (doc.contains("clock")) {
      auto s = doc["clock"].get<std::string>();
      if (s == "auto") c.clock = RunConfig::Clock::automatic;
      else if (s == "system") c.clock = RunConfig::Clock::system;
      else if (s == "logical") c.clock = RunConfig::Clock::logical;
      else throw ConfigError("clock must be auto|system|logical");
    }
    if (doc.contains("proof_length_metric")) {
      c.length_metric = length_metric_from_string(doc["proof_length_metric"].get<std::string>());
    }
    if (doc.contains("output_dir")) c.output_dir = resolve(base, doc["output_dir"].get<std::string>());
    read(doc, "resume", c.resume);

    if (doc.contains("llm")) {
      const auto& l = doc["llm"];
      auto& s = c.llm;
      if (l.contains("provider")) {
        auto p = l["provider"].get<std::string>();
        if (p == "http") s.provider = LlmSettings::Provider::http;
        else if (p == "replay") s.provider = LlmSettings::Provider::replay;
        else if (p == "dry-run" || p == "dry_run") s.provider = LlmSettings::Provider::dry_run;
        else throw ConfigError("llm.provider must be http|replay|dry-run");
      }
      read(l, "endpoint", s.http.endpoint);
      read(l, "api_key_env", s.api_key_env);
      if (l.contains("timeout_s")) s.http.timeout = std::chrono::seconds(l["timeout_s"].get<long>());
      if (l.contains("models")) {
        for (const auto& [role, model] : l["models"].items()) s.http.models[role_from_string(role)] = model.get<std::string>();
      }
      if (l.contains("temperature")) {
        for (const auto& [role, t] : l["temperature"].items()) s.sampling[role_from_string(role)].temperature = t.get<double>();
      }
      if (l.contains("max_output")) {
        for (const auto& [role, n] : l["max_output"].items()) s.sampling[role_from_string(role)].max_output = n.get<int>();
      }
      if (l.contains("retry")) {
        const auto& r = l["retry"];
        read(r, "max_attempts", s.retry.max_attempts);
        read(r, "multiplier", s.retry.multiplier);
        if (r.contains("initial_delay_ms")) s.retry.initial_delay = std::chrono::milliseconds(r["initial_delay_ms"].get<long>());
        if (r.contains("max_delay_ms")) s.retry.max_delay = std::chrono::milliseconds(r["max_delay_ms"].get<long>());
      }
      read(l, "rate_per_second", s.rate_per_second);
      if (l.contains("record_dir") && !l["record_dir"].is_null()) s.record_dir = resolve(base, l["record_dir"].get<std::string>());
      if (l.contains("replay_dir") && !l["replay_dir"].is_null()) s.replay_dir = resolve(base, l["replay_dir"].get<std::string>());
      if (l.contains("prompts")) {
        const auto& p = l["prompts"];
        read(p, "conjecturer", s.prompts.conjecturer);
        read(p, "prover", s.prompts.prover);
        read(p, "prover_false", s.prompts.prover_false);
        read(p, "simple_loop", s.prompts.simple_loop);
        read(p, "nl_prover", s.prompts.nl_prover);
      }
    }

    if (doc.contains("verifier")) {
      const auto& v = doc["verifier"];
      auto& s = c.verifier;
      if (v.contains("backend")) {
        auto b = v["backend"].get<std::string>();
        if (b == "lean") s.backend = VerifierSettings::Backend::lean;
        else if (b == "scripted") s.backend = VerifierSettings::Backend::scripted;
        else throw ConfigError("verifier.backend must be lean|scripted");
      }
      read(v, "command", s.command);
      if (v.contains("project_dir")) s.project_dir = resolve(base, v["project_dir"].get<std::string>());
      if (v.contains("fixtures")) s.fixtures = resolve(base, v["fixtures"].get<std::string>());
      s.command_timeout = seconds_field(v, "command_timeout_s", s.command_timeout);
      s.novelty_timeout = seconds_field(v, "novelty_timeout_s", s.novelty_timeout);
      s.open_timeout = seconds_field(v, "open_timeout_s", s.open_timeout);
      read(v, "pool_size", s.pool_size);
      read(v, "log_fixture_misses", s.log_fixture_misses);
    }

    if (doc.contains("eval")) {
      const auto& e = doc["eval"];
      auto& s = c.eval;
      read(e, "focused_repetitions", s.focused_repetitions);
      read(e, "focused_prefix", s.focused_prefix);
      read(e, "nl_repetitions", s.nl_repetitions);
      read(e, "nl_statement", s.nl_statement);
      read(e, "histogram_bin", s.histogram_bin);
      if (e.contains("reprove_variant")) s.reprove_variant = prompt_variant_from_string(e["reprove_variant"].get<std::string>());
      if (e.contains("focused_variant")) s.focused_variant = prompt_variant_from_string(e["focused_variant"].get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  RunConfig c;
  apply_config(c, doc, path.parent_path());
  return c;
}

nlohmann::json config_snapshot(const RunConfig& c) {
  auto provider = c.llm.provider == LlmSettings::Provider::http     ? "http"
                  : c.llm.provider == LlmSettings::Provider::replay ? "replay"
                                                                    : "dry-run";
  nlohmann::json models;
  for (const auto& [role, m] : c.llm.http.models) models[to_string(role)] = m;
  nlohmann::json sampling;
  for (auto role : kAllRoles) {
    auto s = c.llm.sampling_for(role);
    sampling[to_string(role)] = {{"temperature", s.temperature}, {"max_output", s.max_output}};
  }
  return {{"mode", to_string(c.mode)},
          {"loops", c.effective_loops()},
          {"conjecture_iterations", c.conjecture_iterations},
          {"max_trials", c.max_trials},
          {"context_budget", c.context_budget},
          {"refresh_context_within_loop", c.refresh_context_within_loop},
          {"workers", c.workers},
          {"proof_length_metric", to_string(c.length_metric)},
          {"llm", {{"provider", provider}, {"models", models}, {"sampling", sampling},
                   {"retry_max_attempts", c.llm.retry.max_attempts}}},
          {"verifier", {{"backend", c.verifier.backend == VerifierSettings::Backend::lean ? "lean" : "scripted"},
                        {"command_timeout_ms", c.verifier.command_timeout.count()},
                        {"novelty_timeout_ms", c.verifier.novelty_timeout.count()},
                        {"pool_size", c.verifier.pool_size}}}};
}

}  // namespace cpl
