#include "cpl/run/orchestrator.hpp"

#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>

#include "cpl/core/text.hpp"
#include "cpl/engine/conjecture.hpp"
#include "cpl/engine/prover.hpp"
#include "cpl/eval/report.hpp"

namespace cpl {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::shared_ptr<ChatProvider> make_provider(const LlmSettings& settings) {
  switch (settings.provider) {
    case LlmSettings::Provider::dry_run:
      return std::make_shared<DryRunProvider>();
    case LlmSettings::Provider::replay:
      if (!settings.replay_dir) throw ConfigError("replay provider needs a replay directory");
      return ReplayProvider::load(*settings.replay_dir);
    case LlmSettings::Provider::http: {
      auto http = settings.http;
      if (http.api_key.empty()) {
        const char* key = std::getenv(settings.api_key_env.c_str());
        if (!key || !*key) {
          throw ConfigError("no API key: set " + settings.api_key_env + " or use --replay/--dry-run");
        }
        http.api_key = key;
      }
      return std::make_shared<HttpChatProvider>(std::move(http));
    }
  }
  throw ConfigError("unknown provider");
}

namespace {

nlohmann::json counts_json(const std::map<Role, std::size_t>& counts) {
  nlohmann::json j = nlohmann::json::object();
  for (auto role : kAllRoles) {
    auto it = counts.find(role);
    j[to_string(role)] = it == counts.end() ? 0 : it->second;
  }
  return j;
}

std::map<Role, std::size_t> counts_from_json(const nlohmann::json& j) {
  std::map<Role, std::size_t> out;
  for (const auto& [role, n] : j.items()) {
    if (n.get<std::size_t>() > 0) out[role_from_string(role)] = n.get<std::size_t>();
  }
  return out;
}

nlohmann::json entry_payload(const LibraryEntry& e, const std::string& proposed_name) {
  nlohmann::json j{{"sequence_index", e.sequence_index},
                   {"name", e.statement.name()},
                   {"statement", e.statement.source_text()},
                   {"proof", e.proof.text()},
                   {"provenance", to_string(e.provenance)},
                   {"created_at", e.created_at}};
  if (proposed_name != e.statement.name()) j["proposed_name"] = proposed_name;
  return j;
}

LibraryEntry entry_from_payload(const nlohmann::json& j) {
  LibraryEntry e{TheoremStatement::parse(j.at("statement").get<std::string>()),
                 ProofScript(j.at("proof").get<std::string>()), j.at("sequence_index").get<std::size_t>(),
                 provenance_from_string(j.at("provenance").get<std::string>()),
                 j.at("created_at").get<std::string>()};
  return e;
}

nlohmann::json attempt_payload(const std::string& conjecture, const ProofAttempt& a) {
  nlohmann::json j{{"conjecture", conjecture},
                   {"trial", a.trial},
                   {"proof", a.proof_text},
                   {"empty_response", a.empty_response},
                   {"context_hash", a.context_hash}};
  if (a.check) j["check"] = *a.check;
  return j;
}

void commit(Library& library, const TheoremStatement& stmt, const ProofScript& proof, Provenance prov,
            const fs::path& library_path, EventSink& sink) {
  // The file is written before the event; resumption tolerates a file that
  // is one entry ahead of the log.
  const auto& entry = library.append(stmt, proof, prov, sink.next_timestamp());
  write_library_file(library, library_path);
  sink.emit(EventKind::theorem_added, entry_payload(entry, stmt.name()));
}

void loop_complete(EventSink& sink, std::size_t loop, const Library& library, const ChatGateway& gateway) {
  sink.emit(EventKind::loop_complete,
            {{"loop", loop}, {"library_size", library.size()}, {"calls", counts_json(gateway.call_counts())}});
}

}  // namespace

void run_cpl_loops(const RunConfig& config, RunEnvironment& env, Library& library,
                   const fs::path& library_path, std::size_t first_loop) {
  ConjecturePhaseOptions copts;
  copts.iterations = config.conjecture_iterations;
  copts.context_budget = config.context_budget;
  copts.system_prompt = config.llm.prompts.conjecturer;
  copts.sampling = config.llm.sampling_for(Role::conjecturer);

  ProverOptions popts;
  popts.max_trials = config.max_trials;
  popts.variant = PromptVariant::not_provable;
  popts.context_budget = config.context_budget;
  popts.prompts = config.llm.prompts;
  popts.sampling = config.llm.sampling_for(Role::prover);

  for (std::size_t loop = first_loop; loop <= config.effective_loops(); ++loop) {
    TaggedSink sink(*env.events, {{"loop", loop}});
    sink.emit(EventKind::phase_start, {{"phase", "conjecture"}, {"library_size", library.size()}});
    auto report = run_conjecture_phase(library, env.sessions->primary(), *env.gateway, copts, sink);
    sink.emit(EventKind::phase_report, report.summary());
    if (report.aborted) throw FatalError("conjecture phase aborted: " + *report.aborted);

    sink.emit(EventKind::phase_start, {{"phase", "proving"}, {"conjectures", report.accepted.size()}});
    const auto& conjectures = report.accepted.items();
    auto record = [&](const TheoremStatement& c, const ProofOutcome& outcome) {
      for (const auto& a : outcome.attempts) sink.emit(EventKind::proof_attempt, attempt_payload(c.name(), a));
      auto summary = outcome.summary();
      summary["conjecture"] = c.name();
      summary["statement"] = c.source_text();
      sink.emit(EventKind::proof_complete, summary);
      if (outcome.status == ProofStatus::verified) {
        commit(library, c, *outcome.final_proof, Provenance::cpl, library_path, sink);
      }
    };

    if (config.workers > 1) {
      // Every conjecture is proved against the library as of the loop start,
      // so the work is independent; results are committed in list order.
      const Library snapshot = library;
      for (std::size_t begin = 0; begin < conjectures.size(); begin += config.workers) {
        std::size_t end = std::min(conjectures.size(), begin + config.workers);
        std::vector<std::future<ProofOutcome>> pending;
        for (std::size_t i = begin; i < end; ++i) {
          pending.push_back(std::async(std::launch::async, [&, i] {
            auto lease = env.sessions->acquire();
            return prove(conjectures[i], snapshot, *lease, *env.gateway, popts);
          }));
        }
        std::vector<ProofOutcome> outcomes;
        for (auto& f : pending) outcomes.push_back(f.get());
        for (std::size_t i = begin; i < end; ++i) record(conjectures[i], outcomes[i - begin]);
      }
    } else {
      const Library snapshot = library;
      for (const auto& c : conjectures) {
        const Library& against = config.refresh_context_within_loop ? library : snapshot;
        record(c, prove(c, against, env.sessions->primary(), *env.gateway, popts));
      }
    }
    loop_complete(sink, loop, library, *env.gateway);
  }
}

void run_simple_loop(const RunConfig& config, RunEnvironment& env, Library& library,
                     const fs::path& library_path, std::size_t first_iteration) {
  const auto sampling = config.llm.sampling_for(Role::simple_loop);
  for (std::size_t it = first_iteration; it <= config.effective_loops(); ++it) {
    TaggedSink sink(*env.events, {{"loop", it}});
    sink.emit(EventKind::phase_start, {{"phase", "simple_loop"}, {"library_size", library.size()}});
    auto rendered = render_context(library, {}, config.context_budget);
    const std::string verifier_context = rendered.library_part();

    std::optional<ProofAttempt> previous;
    std::optional<ProvedDeclaration> success;
    std::size_t trials = 0;
    for (std::size_t trial = 1; trial <= config.max_trials && !success; ++trial) {
      trials = trial;
      ProofAttempt attempt;
      attempt.trial = trial;
      auto user = prover_user_content(rendered.text, previous ? &*previous : nullptr);
      attempt.context_hash = text::fnv1a_hex(user);
      std::string name;
      try {
        auto response = env.gateway->complete({Role::simple_loop, config.llm.prompts.simple_loop, user, sampling});
        attempt.proof_text = std::string(text::trim(strip_code_fences(response.text).text));
        auto decl = parse_proved_declaration(attempt.proof_text);
        if (!decl) {
          attempt.empty_response = attempt.proof_text.empty();
          attempt.check = CheckResult::synthetic(Verdict::failed, "no complete theorem declaration found");
        } else if (auto rejected = reject_before_submission(decl->proof_text)) {
          attempt.check = *rejected;
        } else {
          name = decl->statement.name();
          attempt.check = env.sessions->primary().verify_proof(verifier_context, decl->statement,
                                                               ProofScript(decl->proof_text));
          if (attempt.check->verdict == Verdict::verified) success = decl;
        }
      } catch (const FatalError&) {
        throw;
      } catch (const TransportError& e) {
        attempt.check = CheckResult::synthetic(Verdict::failed, std::string("transport: ") + e.what());
      }
      sink.emit(EventKind::proof_attempt, attempt_payload(name, attempt));
      previous = std::move(attempt);
    }
    nlohmann::json summary{{"status", success ? "verified" : "failed_exhausted"}, {"attempts", trials}};
    if (success) {
      summary["conjecture"] = success->statement.name();
      summary["statement"] = success->statement.source_text();
      summary["proof"] = success->proof_text;
    }
    sink.emit(EventKind::proof_complete, summary);
    if (success) {
      commit(library, success->statement, ProofScript(success->proof_text), Provenance::simple_loop,
             library_path, sink);
    }
    loop_complete(sink, it, library, *env.gateway);
  }
}

Library library_from_events(const std::string& seed, const std::vector<RunEvent>& events) {
  Library lib(seed);
  for (const auto& e : events) {
    if (e.kind != EventKind::theorem_added) continue;
    auto entry = entry_from_payload(e.payload);
    if (entry.sequence_index != lib.size()) {
      throw ConsistencyError("theorem_added event " + std::to_string(e.sequence) + " has index " +
                             std::to_string(entry.sequence_index) + ", expected " + std::to_string(lib.size()));
    }
    lib.append(entry.statement, entry.proof, entry.provenance, entry.created_at);
  }
  return lib;
}

ResumePlan plan_resume(const std::vector<RunEvent>& events, const Library& on_disk) {
  ResumePlan plan;
  std::size_t logged = 0;
  for (const auto& e : events) {
    if (e.kind == EventKind::run_complete) plan.complete = true;
    if (e.kind != EventKind::theorem_added) continue;
    auto expected = entry_from_payload(e.payload);
    auto i = expected.sequence_index;
    if (i >= on_disk.size()) {
      throw ConsistencyError("library file is missing entry " + std::to_string(i) + " (" +
                             expected.statement.name() + ") recorded by event " + std::to_string(e.sequence));
    }
    const auto& actual = on_disk.entries()[i];
    if (!(actual == expected)) {
      throw ConsistencyError("library entry " + std::to_string(i) + " (" + actual.statement.name() +
                             ") does not match event " + std::to_string(e.sequence) + " (" +
                             expected.statement.name() + ")");
    }
    logged = i + 1;
  }
  if (on_disk.size() > logged + 1) {
    throw ConsistencyError("library file has " + std::to_string(on_disk.size() - logged) +
                           " entries not in the event log, starting at entry " + std::to_string(logged) + " (" +
                           on_disk.entries()[logged].statement.name() + ")");
  }

  for (std::size_t i = events.size(); i-- > 0;) {
    const auto& e = events[i];
    if (e.kind == EventKind::loop_complete) {
      plan.next_loop = e.payload.at("loop").get<std::size_t>() + 1;
      plan.library_size = e.payload.at("library_size").get<std::size_t>();
      plan.calls = counts_from_json(e.payload.at("calls"));
      plan.keep_events = i + 1;
      return plan;
    }
  }
  // No loop finished: keep only the run header.
  plan.keep_events = !events.empty() && events.front().kind == EventKind::run_start ? 1 : 0;
  return plan;
}

RunResult run_generation(const RunConfig& config, const RunHooks& hooks) {
  config.validate();
  if (config.mode != RunMode::cpl && config.mode != RunMode::simple_loop) {
    throw ConfigError("run_generation handles cpl and simple_loop modes only");
  }
  if (config.seed_path.empty()) throw ConfigError("no seed file given");
  const std::string seed = read_text_file(config.seed_path);

  const fs::path dir = config.output_dir;
  const fs::path library_path = dir / kLibraryFile;
  const fs::path events_path = dir / kEventsFile;
  fs::create_directories(dir);

  RunResult result{Library(seed)};
  ResumePlan plan;
  bool have_events = fs::exists(events_path) && fs::file_size(events_path) > 0;
  if (have_events && !config.resume) {
    throw ConfigError(dir.string() + " already holds a run; pass --resume or choose another output directory");
  }
  if (config.resume && have_events) {
    auto events = EventLog::read(events_path);
    if (!events.empty() && events.front().kind == EventKind::run_start) {
      auto mode = events.front().payload.value("mode", std::string());
      if (mode != to_string(config.mode)) {
        throw ConfigError("cannot resume a " + mode + " run in " + to_string(config.mode) + " mode");
      }
    }
    Library on_disk = fs::exists(library_path) ? read_library_file(library_path) : Library(seed);
    if (on_disk.seed_source() != seed) {
      throw ConsistencyError("seed in " + library_path.string() + " differs from " + config.seed_path.string());
    }
    plan = plan_resume(events, on_disk);
    result.resumed = true;
    result.start_loop = plan.next_loop;
    result.library = on_disk.prefix(plan.library_size);
    if (plan.complete) {
      result.already_complete = true;
      emit_reports(dir, {config.eval.histogram_bin, config.length_metric});
      return result;
    }
    events.resize(plan.keep_events);
    EventLog::rewrite(events_path, events);
  }
  write_library_file(result.library, library_path);

  RunEnvironment env;
  env.provider = hooks.provider ? hooks.provider : make_provider(config.llm);
  if (auto* replay = dynamic_cast<ReplayProvider*>(env.provider.get()); replay && !plan.calls.empty()) {
    replay->fast_forward(plan.calls);
  }
  ChatGateway::Options gopts;
  gopts.retry = config.llm.retry;
  gopts.rate_per_second = config.llm.rate_per_second;
  gopts.transcript = dir / kTranscriptFile;
  gopts.record_dir = config.llm.record_dir;
  gopts.sleep = hooks.sleep;
  env.gateway = std::make_unique<ChatGateway>(env.provider, gopts);
  env.gateway->restore_counts(plan.calls);

  env.events = std::make_unique<EventLog>(
      events_path, config.logical_clock() ? logical_timestamps() : system_timestamps());
  if (hooks.after_event) env.events->set_after_emit(hooks.after_event);

  if (!result.resumed || plan.keep_events == 0) {
    env.events->emit(EventKind::run_start, {{"mode", to_string(config.mode)},
                                            {"seed", config.seed_path.filename().string()},
                                            {"seed_hash", text::fnv1a_hex(seed)},
                                            {"config", config_snapshot(config)}});
  }
  // A resumed run emits nothing extra: its event sequence (and with a
  // logical clock, every timestamp) matches an uninterrupted run.

  // Opening the verifier can take long (Mathlib import); a bad seed is fatal.
  env.sessions = hooks.sessions
                     ? hooks.sessions(config, seed)
                     : std::make_unique<SessionPool>(config.verifier, seed);
  env.sessions->set_warning_sink([&env](const std::string& m) {
    env.events->emit(EventKind::warning, {{"message", m}});
  });

  if (config.mode == RunMode::cpl) {
    run_cpl_loops(config, env, result.library, library_path, plan.next_loop);
  } else {
    run_simple_loop(config, env, result.library, library_path, plan.next_loop);
  }
  env.events->emit(EventKind::run_complete,
                   {{"library_size", result.library.size()}, {"calls", counts_json(env.gateway->call_counts())}});
  emit_reports(dir, {config.eval.histogram_bin, config.length_metric});
  return result;
}

}  // namespace cpl
