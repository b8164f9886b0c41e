// Command-line front end: generation runs, reprove campaigns, the
// natural-language session and report generation.
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cpl/eval/histogram.hpp"
#include "cpl/eval/nl.hpp"
#include "cpl/eval/report.hpp"
#include "cpl/eval/reprove.hpp"
#include "cpl/run/config.hpp"
#include "cpl/run/orchestrator.hpp"

namespace fs = std::filesystem;
using namespace cpl;

namespace {

// Options shared by every subcommand that talks to a model or a verifier.
struct Common {
  std::string config;
  std::string seed;
  std::string output;
  std::string record;
  std::string replay;
  bool dry_run = false;
  std::string fixtures;
  std::string lean_project;
  std::optional<std::size_t> max_trials;
  std::optional<std::size_t> workers;
  std::string clock;

  void attach(CLI::App* app, bool needs_seed) {
    app->add_option("--config", config, "JSON config file");
    auto* s = app->add_option("--seed", seed, "seed Lean file (definitions)");
    if (needs_seed) s->check(CLI::ExistingFile);
    app->add_option("--output", output, "output directory");
    auto* rec = app->add_option("--record", record, "record model responses into this directory");
    auto* rep = app->add_option("--replay", replay, "serve model responses from this directory");
    rec->excludes(rep);
    auto* dry = app->add_flag("--dry-run", dry_run, "instant synthetic model and scripted verifier");
    dry->excludes(rep);
    app->add_option("--verifier-fixtures", fixtures, "use the scripted verifier with these fixtures");
    app->add_option("--lean-project", lean_project, "Lake project with Mathlib and the REPL (real verifier)");
    app->add_option("--max-trials", max_trials, "prover trials per statement");
    app->add_option("--workers", workers, "concurrent proof searches");
    app->add_option("--clock", clock, "event timestamps: auto|system|logical");
  }

  RunConfig build() const {
    RunConfig c;
    if (!config.empty()) c = load_config(config);
    if (!seed.empty()) c.seed_path = seed;
    if (!output.empty()) c.output_dir = output;
    if (!record.empty()) c.llm.record_dir = record;
    if (!replay.empty()) {
      c.llm.provider = LlmSettings::Provider::replay;
      c.llm.replay_dir = replay;
    }
    if (dry_run) {
      c.llm.provider = LlmSettings::Provider::dry_run;
      if (fixtures.empty() && lean_project.empty()) {
        c.verifier.backend = VerifierSettings::Backend::scripted;
        c.verifier.fixtures.clear();
        c.verifier.log_fixture_misses = false;
      }
    }
    if (!fixtures.empty()) {
      c.verifier.backend = VerifierSettings::Backend::scripted;
      c.verifier.fixtures = fixtures;
    }
    if (!lean_project.empty()) {
      c.verifier.backend = VerifierSettings::Backend::lean;
      c.verifier.project_dir = lean_project;
    }
    if (max_trials) c.max_trials = *max_trials;
    if (workers) {
      c.workers = *workers;
      c.verifier.pool_size = std::max(c.verifier.pool_size, *workers);
    }
    if (clock == "system") c.clock = RunConfig::Clock::system;
    else if (clock == "logical") c.clock = RunConfig::Clock::logical;
    else if (!clock.empty() && clock != "auto") throw ConfigError("--clock must be auto|system|logical");
    return c;
  }
};

// Gateway, verifier pool and event log for the evaluation subcommands.
struct EvalRun {
  RunEnvironment env;
  fs::path dir;
  std::string seed;

  EvalRun(const RunConfig& c, const std::string& mode) {
    c.validate();
    if (c.seed_path.empty()) throw ConfigError("no seed file given (--seed or config \"seed\")");
    seed = read_text_file(c.seed_path);
    dir = c.output_dir;
    fs::create_directories(dir);
    if (fs::exists(dir / kEventsFile) && fs::file_size(dir / kEventsFile) > 0) {
      throw ConfigError(dir.string() + " already holds a run; choose another --output");
    }
    env.provider = make_provider(c.llm);
    ChatGateway::Options g;
    g.retry = c.llm.retry;
    g.rate_per_second = c.llm.rate_per_second;
    g.transcript = dir / kTranscriptFile;
    g.record_dir = c.llm.record_dir;
    env.gateway = std::make_unique<ChatGateway>(env.provider, g);
    env.events = std::make_unique<EventLog>(dir / kEventsFile,
                                            c.logical_clock() ? logical_timestamps() : system_timestamps());
    env.events->emit(EventKind::run_start, {{"mode", mode}, {"config", config_snapshot(c)}});
  }

  void open_verifier(const RunConfig& c) {
    env.sessions = std::make_unique<SessionPool>(c.verifier, seed);
    env.sessions->set_warning_sink([this](const std::string& m) {
      env.events->emit(EventKind::warning, {{"message", m}});
    });
  }

  void finish(const RunConfig& c) {
    env.events->emit(EventKind::run_complete, {{"calls", nlohmann::json::object()}});
    emit_reports(dir, {c.eval.histogram_bin, c.length_metric});
  }
};

std::vector<ReproveMode> modes_from(const std::string& m) {
  if (m == "both") return {ReproveMode::with_context, ReproveMode::definitions_only};
  return {reprove_mode_from_string(m)};
}

ReproveOptions reprove_options(const RunConfig& c, PromptVariant variant) {
  ReproveOptions o;
  o.prover.max_trials = c.max_trials;
  o.prover.variant = variant;
  o.prover.context_budget = c.context_budget;
  o.prover.prompts = c.llm.prompts;
  o.prover.sampling = c.llm.sampling_for(Role::prover);
  o.workers = c.workers;
  return o;
}

void print_reprove(const ReproveReport& r) {
  auto rate = r.success_rate();
  std::cout << r.campaign << " " << to_string(r.mode) << ": verified " << rate.exact() << " (" << rate.percent()
            << "), failed " << r.count(ProofStatus::failed_exhausted) << ", declared "
            << r.count(ProofStatus::declared_unprovable) << "\n";
}

int run_main(int argc, char** argv) {
  CLI::App app{"Conjecturing-proving loop for Lean 4"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "generate a library (cpl or simple-loop)");
  Common run_common;
  run_common.attach(run, true);
  std::string mode = "cpl";
  std::optional<std::size_t> loops, iterations;
  bool resume = false, refresh = false;
  long crash_after = 0;
  run->add_option("--mode", mode, "cpl | simple-loop")->check(CLI::IsMember({"cpl", "simple-loop", "simple_loop"}));
  run->add_option("--loops", loops, "loops (cpl, default 30) or iterations (simple-loop, default 400)");
  run->add_option("--iterations", iterations, "conjecturer calls per conjecture phase (default 16)");
  run->add_flag("--resume", resume, "continue an interrupted run in --output");
  run->add_flag("--refresh-context", refresh, "prove later conjectures of a loop against the updated library");
  run->add_option("--crash-after-theorem", crash_after, "test hook: exit abruptly after the Nth theorem_added")
      ->group("");

  // reprove-all
  auto* rall = app.add_subcommand("reprove-all", "re-prove every entry of a library");
  Common rall_common;
  rall_common.attach(rall, false);
  std::string rall_library, rall_mode = "both", rall_variant;
  rall->add_option("--library", rall_library, "library.lean of a finished run")->required()->check(CLI::ExistingFile);
  rall->add_option("--mode", rall_mode, "with_context | definitions_only | both");
  rall->add_option("--variant", rall_variant, "prover prompt: not_provable | false");

  // reprove-focused
  auto* rfoc = app.add_subcommand("reprove-focused", "repeated proof campaigns on one statement");
  Common rfoc_common;
  rfoc_common.attach(rfoc, false);
  std::string rfoc_statement, rfoc_library, rfoc_mode = "both", rfoc_variant;
  std::optional<std::size_t> rfoc_n, rfoc_prefix;
  rfoc->add_option("--statement", rfoc_statement, "file holding one theorem declaration")
      ->required()
      ->check(CLI::ExistingFile);
  rfoc->add_option("--library", rfoc_library, "library.lean supplying the context prefix")->check(CLI::ExistingFile);
  rfoc->add_option("--n", rfoc_n, "repetitions per setting (default 128)");
  rfoc->add_option("--prefix", rfoc_prefix, "library entries in the with-context setting (default 49)");
  rfoc->add_option("--mode", rfoc_mode, "with_context | definitions_only | both");
  rfoc->add_option("--variant", rfoc_variant, "prover prompt: not_provable | false (default false)");

  // nl
  auto* nl = app.add_subcommand("nl", "natural-language proof session with manual grading");
  nl->require_subcommand(1);
  auto* nl_run = nl->add_subcommand("run", "collect responses");
  Common nl_common;
  nl_common.attach(nl_run, false);
  std::optional<std::size_t> nl_n;
  std::string nl_statement;
  nl_run->add_option("--n", nl_n, "responses to collect (default 16)");
  nl_run->add_option("--statement-text", nl_statement, "statement in English");
  auto* nl_grade = nl->add_subcommand("grade", "grade one response");
  std::string grade_dir, grade_id, grade_category, grader, grade_note;
  nl_grade->add_option("--dir", grade_dir, "session directory")->required();
  nl_grade->add_option("--id", grade_id, "response id")->required();
  nl_grade->add_option("--category", grade_category, "correctly_proven | gap | rejected_as_false")->required();
  nl_grade->add_option("--grader", grader, "who graded")->required();
  nl_grade->add_option("--note", grade_note, "free-form note");
  auto* nl_report = nl->add_subcommand("report", "three-way breakdown (refuses while responses are pending)");
  std::string report_dir;
  nl_report->add_option("--dir", report_dir, "session directory")->required();

  // analyze
  auto* analyze = app.add_subcommand("analyze", "histograms and reports");
  analyze->require_subcommand(1);
  auto* hist = analyze->add_subcommand("histogram", "proof-length histogram of a library");
  std::string hist_library, hist_metric = "lines";
  std::size_t hist_bin = 10;
  hist->add_option("--library", hist_library, "library.lean")->required()->check(CLI::ExistingFile);
  hist->add_option("--bin", hist_bin, "bin width")->check(CLI::PositiveNumber);
  hist->add_option("--metric", hist_metric, "lines | chars");
  auto* areport = analyze->add_subcommand("report", "regenerate report.json for a run directory");
  std::string areport_dir;
  std::size_t areport_bin = 10;
  std::string areport_metric = "lines";
  areport->add_option("--dir", areport_dir, "run directory")->required();
  areport->add_option("--bin", areport_bin, "bin width")->check(CLI::PositiveNumber);
  areport->add_option("--metric", areport_metric, "lines | chars");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    auto c = run_common.build();
    if (run_common.config.empty() || run->count("--mode")) c.mode = run_mode_from_string(mode);
    if (loops) c.loops = *loops;
    if (iterations) c.conjecture_iterations = *iterations;
    if (resume) c.resume = true;
    if (refresh) c.refresh_context_within_loop = true;
    RunHooks hooks;
    if (crash_after > 0) {
      hooks.after_event = [crash_after, seen = 0L](const RunEvent& e) mutable {
        if (e.kind == EventKind::theorem_added && ++seen == crash_after) std::_Exit(137);
      };
    }
    auto result = run_generation(c, hooks);
    if (result.resumed && !result.already_complete) {
      std::cerr << "resumed at loop " << result.start_loop << "\n";
    }
    if (result.already_complete) {
      std::cout << "run already complete: " << result.library.size() << " theorems\n";
    } else {
      std::cout << to_string(c.mode) << ": " << result.library.size() << " theorems in "
                << (c.output_dir / kLibraryFile).string() << "\n";
    }
    return 0;
  }

  if (rall->parsed()) {
    auto c = rall_common.build();
    auto library = read_library_file(rall_library);
    if (c.seed_path.empty()) {
      // The library file starts with the seed; reuse it.
      c.seed_path = fs::path(c.output_dir) / "seed.lean";
      fs::create_directories(c.output_dir);
      std::ofstream(c.seed_path, std::ios::binary) << library.seed_source();
    }
    auto variant = rall_variant.empty() ? c.eval.reprove_variant : prompt_variant_from_string(rall_variant);
    EvalRun ev(c, "reprove_all");
    if (ev.seed != library.seed_source()) throw ConsistencyError("--seed differs from the library's seed");
    ev.open_verifier(c);
    for (auto m : modes_from(rall_mode)) {
      print_reprove(reprove_all(library, m, *ev.env.sessions, *ev.env.gateway, reprove_options(c, variant),
                                *ev.env.events));
    }
    ev.finish(c);
    return 0;
  }

  if (rfoc->parsed()) {
    auto c = rfoc_common.build();
    auto decl_text = read_text_file(rfoc_statement);
    auto parsed = parse_theorem_declarations(decl_text);
    std::optional<TheoremStatement> statement;
    if (parsed.statements.size() == 1) statement = parsed.statements.front();
    else if (auto proved = parse_proved_declaration(decl_text)) statement = proved->statement;
    if (!statement) throw ConfigError(rfoc_statement + " must hold exactly one theorem declaration");

    std::optional<Library> library;
    if (!rfoc_library.empty()) library = read_library_file(rfoc_library);
    if (c.seed_path.empty()) {
      if (!library) throw ConfigError("give --seed or --library");
      c.seed_path = fs::path(c.output_dir) / "seed.lean";
      fs::create_directories(c.output_dir);
      std::ofstream(c.seed_path, std::ios::binary) << library->seed_source();
    }
    std::size_t n = rfoc_n.value_or(c.eval.focused_repetitions);
    std::size_t prefix = rfoc_prefix.value_or(c.eval.focused_prefix);
    auto variant = rfoc_variant.empty() ? c.eval.focused_variant : prompt_variant_from_string(rfoc_variant);
    EvalRun ev(c, "reprove_focused");
    Library base = library ? *library : Library(ev.seed);
    if (base.seed_source() != ev.seed) throw ConsistencyError("--seed differs from the library's seed");
    auto modes = modes_from(rfoc_mode);
    bool needs_prefix = std::find(modes.begin(), modes.end(), ReproveMode::with_context) != modes.end();
    if (needs_prefix && base.size() < prefix) {
      throw ConfigError("with-context setting needs " + std::to_string(prefix) + " library entries, have " +
                        std::to_string(base.size()));
    }
    ev.open_verifier(c);
    for (auto m : modes) {
      print_reprove(reprove_focused(*statement, base.prefix(std::min(prefix, base.size())), n, m,
                                    *ev.env.sessions, *ev.env.gateway, reprove_options(c, variant),
                                    *ev.env.events));
    }
    ev.finish(c);
    return 0;
  }

  if (nl_run->parsed()) {
    auto c = nl_common.build();
    EvalRun ev(c, "nl_session");
    NlStore store(ev.dir);
    NlSessionOptions o;
    o.repetitions = nl_n.value_or(c.eval.nl_repetitions);
    o.statement_text = nl_statement.empty() ? c.eval.nl_statement : nl_statement;
    o.system_prompt = c.llm.prompts.nl_prover;
    o.sampling = c.llm.sampling_for(Role::nl_prover);
    nl_session(ev.seed, store, *ev.env.gateway, o, *ev.env.events);
    ev.finish(c);
    auto b = store.breakdown();
    std::cout << b.responses << " responses stored in " << (ev.dir / "nl_responses").string() << ", "
              << b.pending.size() << " pending grading\n";
    return 0;
  }

  if (nl_grade->parsed()) {
    NlStore store(grade_dir);
    auto g = store.grade(grade_id, nl_category_from_string(grade_category), grader, grade_note,
                         iso8601_utc(std::chrono::system_clock::now(), false));
    std::cout << g.response_id << ": " << to_string(g.category) << "\n";
    return 0;
  }

  if (nl_report->parsed()) {
    auto b = NlStore(report_dir).finalize();
    std::cout << b.table();
    return 0;
  }

  if (hist->parsed()) {
    auto library = read_library_file(hist_library);
    auto bins = proof_length_histogram(library, hist_bin, length_metric_from_string(hist_metric));
    std::cout << histogram_csv(bins, hist_bin);
    return 0;
  }

  if (areport->parsed()) {
    auto report = emit_reports(areport_dir, {areport_bin, length_metric_from_string(areport_metric)});
    std::cout << read_text_file(fs::path(areport_dir) / "report.txt");
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_main(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConsistencyError& e) {
    std::cerr << "inconsistent state: " << e.what() << "\n";
    return 3;
  } catch (const SessionStartupError& e) {
    std::cerr << "verifier startup failed: " << e.what() << "\n";
    for (const auto& d : e.diagnostics()) std::cerr << "  " << format_diagnostic(d) << "\n";
    return 4;
  } catch (const FatalError& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
