// Acceptance checks. Prints one line per criterion; exit status 0 when no
// selected criterion fails, 77 when every selected criterion was skipped.
//
//   acceptance            all criteria
//   acceptance 1 3 7      a subset

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpl/engine/prover.hpp"
#include "cpl/eval/histogram.hpp"
#include "cpl/eval/report.hpp"
#include "cpl/eval/reprove.hpp"
#include "cpl/run/orchestrator.hpp"
#include "cpl/verifier/scripted.hpp"

namespace fs = std::filesystem;
using namespace cpl;

namespace {

// Pinned limits.
constexpr double kReplayBudgetSeconds = 5.0;
constexpr double kDryRunBudgetSeconds = 10.0;
constexpr std::uint32_t kKillPointSeed = 20240917;
constexpr std::size_t kKillPoints = 3;

const fs::path kFixtures = CPL_FIXTURE_DIR;
const fs::path kCli = CPL_CLI;

enum class Outcome { pass, fail, skip };

struct Result {
  Outcome outcome;
  std::string detail;
};

Result pass(std::string d = "") { return {Outcome::pass, std::move(d)}; }
Result fail(std::string d) { return {Outcome::fail, std::move(d)}; }
Result skip(std::string d) { return {Outcome::skip, std::move(d)}; }

// Thrown by check() to end a criterion early.
struct Failed {
  std::string what;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw Failed{what};
}

template <typename A, typename B>
void check_eq(const A& got, const B& want, const std::string& what) {
  if (!(got == want)) {
    std::ostringstream s;
    s << what << ": got " << got << ", want " << want;
    throw Failed{s.str()};
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Scratch {
 public:
  Scratch() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("cpl-acceptance-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

// Runs the CLI, output to `log`. Returns the exit status.
int cli(const std::vector<std::string>& args, const fs::path& log) {
  std::string cmd = quote(kCli.string());
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " >" + quote(log.string()) + " 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void cli_ok(const std::vector<std::string>& args, const fs::path& log) {
  int rc = cli(args, log);
  if (rc != 0) throw Failed{"cpl " + args.front() + " exited " + std::to_string(rc) + ": " + slurp(log)};
}

std::vector<RunEvent> events_in(const fs::path& dir) { return EventLog::read(dir / kEventsFile); }

std::size_t count(const std::vector<RunEvent>& events, EventKind kind) {
  std::size_t n = 0;
  for (const auto& e : events) n += e.kind == kind;
  return n;
}

// events.jsonl with timestamps (and the timestamps copied into payloads) blanked.
std::map<std::string, std::size_t> transcript_call_counts_or_empty(const fs::path& dir) {
  if (!fs::exists(dir / kTranscriptFile)) return {};
  return transcript_call_counts(dir / kTranscriptFile);
}

std::string normalized_events(const fs::path& dir) {
  std::string out;
  for (auto e : events_in(dir)) {
    e.timestamp = "T";
    if (e.payload.is_object() && e.payload.contains("created_at")) e.payload["created_at"] = "T";
    out += to_json(e).dump() + "\n";
  }
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::string> fixture_run_args(const fs::path& out) {
  return {"run", "--config", (kFixtures / "cpl3" / "config.json").string(), "--output", out.string()};
}

// --- criteria ---------------------------------------------------------------

Result replay_determinism() {
  Scratch tmp;
  auto t0 = std::chrono::steady_clock::now();
  // same command line twice; the first output is moved aside in between
  cli_ok(fixture_run_args(tmp / "run"), tmp / "first.log");
  fs::rename(tmp / "run", tmp / "first");
  cli_ok(fixture_run_args(tmp / "run"), tmp / "second.log");
  double elapsed = seconds_since(t0);

  auto lib1 = slurp(tmp / "first" / kLibraryFile);
  check(!lib1.empty(), "library.lean missing");
  check(lib1 == slurp(tmp / "run" / kLibraryFile), "library.lean differs between runs");
  check(normalized_events(tmp / "first") == normalized_events(tmp / "run"), "events.jsonl differs between runs");
  check_eq(read_library_file(tmp / "run" / kLibraryFile).size(), 4u, "library entries");
  check(elapsed < kReplayBudgetSeconds, "took " + std::to_string(elapsed) + " s");
  std::ostringstream d;
  d.precision(2);
  d << std::fixed << elapsed << " s for two runs";
  return pass(d.str());
}

Result protocol_constants() {
  Scratch tmp;
  auto seed = (kFixtures / "seed.lean").string();
  auto t0 = std::chrono::steady_clock::now();

  cli_ok({"run", "--dry-run", "--seed", seed, "--output", (tmp / "cpl").string()}, tmp / "cpl.log");
  auto ev = events_in(tmp / "cpl");
  check_eq(count(ev, EventKind::loop_complete), 30u, "cpl loops");
  std::size_t phases = 0;
  for (const auto& e : ev) {
    if (e.kind == EventKind::phase_report) {
      ++phases;
      check_eq(e.payload.at("iterations_run").get<std::size_t>(), 16u, "conjecturer iterations in a phase");
    }
    if (e.kind == EventKind::proof_complete) {
      check_eq(e.payload.at("attempts").get<std::size_t>(), 16u, "prover trials");
      check_eq(e.payload.at("status").get<std::string>(), std::string("failed_exhausted"), "dry-run proof status");
    }
  }
  check_eq(phases, 30u, "conjecture phases");
  check(count(ev, EventKind::proof_complete) > 0, "no proof campaigns ran");
  auto calls = transcript_call_counts_or_empty(tmp / "cpl");
  check_eq(calls["conjecturer"], 30u * 16u, "conjecturer calls");
  check_eq(calls["prover"], count(ev, EventKind::proof_complete) * 16u, "prover calls");

  cli_ok({"run", "--dry-run", "--mode", "simple-loop", "--seed", seed, "--output", (tmp / "simple").string()},
         tmp / "simple.log");
  ev = events_in(tmp / "simple");
  check_eq(count(ev, EventKind::loop_complete), 400u, "simple-loop iterations");
  std::map<std::size_t, std::size_t> per_iteration;
  for (const auto& e : ev)
    if (e.kind == EventKind::proof_attempt) ++per_iteration[e.payload.at("loop").get<std::size_t>()];
  check_eq(per_iteration.size(), 400u, "simple-loop iterations with attempts");
  for (const auto& [it, n] : per_iteration) check_eq(n, 16u, "simple-loop trials in iteration " + std::to_string(it));

  cli_ok({"reprove-focused", "--dry-run", "--seed", seed, "--statement",
          (kFixtures / "focused_statement.lean").string(), "--mode", "definitions_only", "--output",
          (tmp / "focused").string()},
         tmp / "focused.log");
  check_eq(count(events_in(tmp / "focused"), EventKind::reprove_result), 128u, "focused repetitions");

  cli_ok({"nl", "run", "--dry-run", "--seed", seed, "--output", (tmp / "nl").string()}, tmp / "nl.log");
  check_eq(count(events_in(tmp / "nl"), EventKind::nl_response), 16u, "natural-language repetitions");

  double elapsed = seconds_since(t0);
  check(elapsed < kDryRunBudgetSeconds, "took " + std::to_string(elapsed) + " s");
  std::ostringstream d;
  d.precision(2);
  d << std::fixed << "16/16/30/400/128/16 in " << elapsed << " s";
  return pass(d.str());
}

Result prover_state_machine() {
  const std::string seed = "import Mathlib\n\ndef P (n : Nat) : Prop := True\n";
  const auto goal = TheoremStatement::parse("theorem g : P 1 := sorry");
  Scratch tmp;
  auto quiet = [&](const std::string& transcript) {
    ChatGateway::Options o;
    o.sleep = [](std::chrono::milliseconds) {};
    o.transcript = tmp / transcript;
    return o;
  };
  auto replay = [](std::vector<std::string> rs) {
    std::map<Role, std::vector<ReplayEntry>> q;
    for (auto& r : rs) q[Role::prover].push_back({r, std::nullopt});
    return std::make_shared<ReplayProvider>(std::move(q));
  };
  auto scripted = [&](nlohmann::json rules) {
    return ScriptedSession(seed, ScriptedFixtures::from_json({{"log_misses", false}, {"rules", rules}}));
  };

  // (a)
  {
    auto session = scripted({{{"op", "proof"}, {"statement", "P 1"}, {"proof", "by trivial"}, {"verdict", "verified"}}});
    ChatGateway gw(replay({"by trivial", "by trivial"}), quiet("a.jsonl"));
    auto out = prove(goal, Library(seed), session, gw, {});
    check(out.status == ProofStatus::verified, "(a) not verified");
    check_eq(gw.calls(Role::prover), 1u, "(a) gateway calls");
    check_eq(session.proof_calls(), 1u, "(a) verifier calls");
  }
  // (b) for every k
  for (std::size_t k = 1; k <= 16; ++k) {
    std::vector<std::string> rs(k - 1, "by simp");
    rs.push_back("");
    auto session = scripted(nlohmann::json::array());
    ChatGateway gw(replay(rs), quiet("b.jsonl"));
    auto out = prove(goal, Library(seed), session, gw, {});
    check(out.status == ProofStatus::declared_unprovable, "(b) k=" + std::to_string(k) + " not declared_unprovable");
    check_eq(gw.calls(Role::prover), k, "(b) gateway calls at k=" + std::to_string(k));
    check_eq(session.proof_calls(), k - 1, "(b) verifier calls at k=" + std::to_string(k));
  }
  // (c)
  {
    std::vector<std::string> rs;
    nlohmann::json rules = nlohmann::json::array();
    for (int t = 1; t <= 16; ++t) {
      rs.push_back("by\n  attempt_" + std::to_string(t));
      rules.push_back({{"op", "proof"}, {"statement", "P 1"}, {"proof", rs.back()}, {"verdict", "failed"},
                       {"diagnostics", {{{"severity", "error"}, {"line", 2}, {"column", 2},
                                         {"message", "unknown identifier 'attempt_" + std::to_string(t) + "'"}}}}});
    }
    auto session = scripted(rules);
    ChatGateway gw(replay(rs), quiet("c.jsonl"));
    auto out = prove(goal, Library(seed), session, gw, {});
    check(out.status == ProofStatus::failed_exhausted, "(c) not failed_exhausted");
    check_eq(out.attempts.size(), 16u, "(c) trials");
    std::vector<nlohmann::json> calls;
    std::ifstream in(tmp / "c.jsonl");
    for (std::string l; std::getline(in, l);)
      if (!l.empty()) calls.push_back(nlohmann::json::parse(l));
    check_eq(calls.size(), 16u, "(c) transcript lines");
    for (std::size_t t = 2; t <= 16; ++t) {
      auto user = calls[t - 1].at("user_content").get<std::string>();
      auto prev = "unknown identifier 'attempt_" + std::to_string(t - 1) + "'";
      check(user.find(prev) != std::string::npos, "(c) trial " + std::to_string(t) + " lacks trial t-1 diagnostics");
      check(user.find(rs[t - 2]) != std::string::npos, "(c) trial " + std::to_string(t) + " lacks trial t-1 proof");
      if (t > 2) {
        auto older = "unknown identifier 'attempt_" + std::to_string(t - 2) + "'";
        check(user.find(older) == std::string::npos, "(c) trial " + std::to_string(t) + " carries stale diagnostics");
      }
    }
  }
  return pass("(a) (b) k=1..16 (c)");
}

std::optional<fs::path> lean_project() {
  const char* p = std::getenv("CPL_LEAN_PROJECT");
  if (!p || !*p) return std::nullopt;
  return fs::path(p);
}

const char* kGated = "gated: set CPL_LEAN_PROJECT to a Lake project with Mathlib and the REPL";

std::unique_ptr<VerifierSession> lean_session(const fs::path& project, const std::string& seed) {
  VerifierSettings s;
  s.backend = VerifierSettings::Backend::lean;
  s.project_dir = project;
  return open_session(s, seed);
}

Result novelty_semantics() {
  auto project = lean_project();
  if (!project) return skip(kGated);
  auto seed = slurp(kFixtures / "seed.lean");
  auto session = lean_session(*project, seed);

  auto trivial = TheoremStatement::parse("theorem t : 1 = 1 := sorry");
  auto r = session->check_novelty(seed, trivial);
  check(r.verdict == cpl::Verdict::known, "(a) 1 = 1 not known");

  auto conj = TheoremStatement::parse("theorem conj_in_context (A : Set X) (h : AlphaOpen A) : SemiOpen A := sorry");
  auto context = join_declarations(seed, std::vector<std::string>{conj.source_text()});
  auto twin = TheoremStatement::parse("theorem conj_again (A : Set X) (h : AlphaOpen A) : SemiOpen A := sorry");
  check(session->check_novelty(context, twin).verdict == cpl::Verdict::known, "(b) textual duplicate not known");

  auto focused = TheoremStatement::parse(slurp(kFixtures / "focused_statement.lean"));
  check(session->check_novelty(seed, focused).verdict == cpl::Verdict::novel, "(c) focused statement not novel");
  return pass();
}

Result published_proof_oracle() {
  auto project = lean_project();
  if (!project) return skip(kGated);
  auto seed = slurp(kFixtures / "seed.lean");
  auto session = lean_session(*project, seed);
  auto decl = slurp(kFixtures / "published_proof.lean");
  auto parsed = parse_proved_declaration(decl);
  check(parsed.has_value(), "fixture does not parse");
  auto r = session->verify_proof(seed, parsed->statement, ProofScript(parsed->proof_text));
  check(r.verdict == cpl::Verdict::verified, "not verified: " + nlohmann::json(r).dump());
  return pass();
}

Result accounting() {
  const std::string seed = "import Mathlib\n\ndef P (n : Nat) : Prop := True\n";
  Library lib(seed);
  nlohmann::json rules = nlohmann::json::array();
  for (int i = 0; i < 10; ++i) {
    auto body = "P " + std::to_string(i);
    lib.append(TheoremStatement::parse("theorem e" + std::to_string(i) + " : " + body + " := sorry"),
               ProofScript("by trivial"), Provenance::cpl, "1970-01-01T00:00:00Z");
    if (i != 6) rules.push_back({{"op", "proof"}, {"statement", body}, {"proof", "by trivial"}, {"verdict", "verified"}});
  }
  std::vector<std::unique_ptr<VerifierSession>> sessions;
  sessions.push_back(std::make_unique<ScriptedSession>(
      seed, ScriptedFixtures::from_json({{"log_misses", false}, {"rules", rules}})));
  SessionPool pool(std::move(sessions));
  std::map<Role, std::vector<ReplayEntry>> q;
  for (int i = 0; i < 10; ++i) q[Role::prover].push_back({"by trivial", std::nullopt});
  ChatGateway::Options o;
  o.sleep = [](std::chrono::milliseconds) {};
  ChatGateway gw(std::make_shared<ReplayProvider>(std::move(q)), o);
  MemorySink events;
  ReproveOptions ro;
  ro.prover.max_trials = 1;
  auto report = reprove_all(lib, ReproveMode::with_context, pool, gw, ro, events);
  check_eq(report.success_rate().exact(), std::string("9/10"), "success rate");
  check_eq(report.success_rate().percent(), std::string("90%"), "rendered rate");

  std::vector<std::size_t> lengths{3, 12, 19};
  auto bins = histogram(lengths, 10);
  check_eq(bins.size(), 2u, "bins");
  check_eq(bins[0].start, 0u, "first bin start");
  check_eq(bins[0].count, 1u, "first bin count");
  check_eq(bins[1].start, 10u, "second bin start");
  check_eq(bins[1].count, 2u, "second bin count");
  check_eq(bins[0].count + bins[1].count, 3u, "histogram total");
  return pass("9/10 -> 90%, bins [1, 2]");
}

Result crash_consistency() {
  Scratch tmp;
  cli_ok(fixture_run_args(tmp / "full"), tmp / "full.log");
  auto want = slurp(tmp / "full" / kLibraryFile);
  auto adds = count(events_in(tmp / "full"), EventKind::theorem_added);
  check(adds >= kKillPoints, "fixture run adds too few theorems");

  std::vector<std::size_t> points(adds);
  for (std::size_t i = 0; i < adds; ++i) points[i] = i + 1;
  std::mt19937 rng(kKillPointSeed);
  std::shuffle(points.begin(), points.end(), rng);
  points.resize(kKillPoints);

  std::string detail = "killed after theorem";
  for (auto k : points) {
    auto dir = tmp / ("kill" + std::to_string(k));
    auto args = fixture_run_args(dir);
    args.push_back("--crash-after-theorem");
    args.push_back(std::to_string(k));
    int rc = cli(args, dir.string() + ".crash.log");
    check(rc != 0, "run with kill point " + std::to_string(k) + " did not die");
    check_eq(count(events_in(dir), EventKind::theorem_added), k, "events at kill point");
    auto resume = fixture_run_args(dir);
    resume.push_back("--resume");
    cli_ok(resume, dir.string() + ".resume.log");
    check(slurp(dir / kLibraryFile) == want, "library after resume at " + std::to_string(k) + " differs");
    check(slurp(dir / kEventsFile) == slurp(tmp / "full" / kEventsFile),
          "event log after resume at " + std::to_string(k) + " differs");
    detail += " " + std::to_string(k);
  }
  return pass(detail);
}

Result library_validity() {
  auto project = lean_project();
  if (!project) return skip(kGated);
  Scratch tmp;
  cli_ok(fixture_run_args(tmp / "run"), tmp / "run.log");
  auto text = slurp(tmp / "run" / kLibraryFile);
  // opening a session elaborates the whole file and rejects any error
  auto session = lean_session(*project, text);
  return pass(std::to_string(read_library_file(tmp / "run" / kLibraryFile).size()) + " entries elaborate");
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<std::string, std::function<Result()>>> criteria{
      {1, {"deterministic replay", replay_determinism}},
      {2, {"protocol constants", protocol_constants}},
      {3, {"prover state machine", prover_state_machine}},
      {4, {"novelty semantics", novelty_semantics}},
      {5, {"published proof verifies", published_proof_oracle}},
      {6, {"accounting", accounting}},
      {7, {"crash consistency", crash_consistency}},
      {8, {"library file elaborates", library_validity}},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (const auto& [n, _] : criteria) selected.push_back(n);

  int failures = 0, skips = 0;
  for (int n : selected) {
    auto it = criteria.find(n);
    if (it == criteria.end()) {
      std::cerr << "no criterion " << n << "\n";
      return 2;
    }
    Result v{Outcome::fail, ""};
    try {
      v = it->second.second();
    } catch (const Failed& f) {
      v = fail(f.what);
    } catch (const std::exception& e) {
      v = fail(std::string("exception: ") + e.what());
    }
    const char* tag = v.outcome == Outcome::pass ? "PASS" : v.outcome == Outcome::fail ? "FAIL" : "SKIP";
    std::cout << "criterion " << n << ": " << tag << "  " << it->second.first;
    if (!v.detail.empty()) std::cout << " (" << v.detail << ")";
    std::cout << std::endl;
    failures += v.outcome == Outcome::fail;
    skips += v.outcome == Outcome::skip;
  }
  if (failures) return 1;
  if (skips == static_cast<int>(selected.size())) return 77;
  return 0;
}
