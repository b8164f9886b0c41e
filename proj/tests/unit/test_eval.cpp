#include <gtest/gtest.h>

#include <random>

#include "cpl/error.hpp"
#include "cpl/eval/histogram.hpp"
#include "cpl/eval/nl.hpp"
#include "cpl/eval/report.hpp"
#include "cpl/eval/reprove.hpp"
#include "cpl/run/orchestrator.hpp"
#include "cpl/verifier/scripted.hpp"
#include "support.hpp"

namespace cpl {
namespace {

const std::string kSeed = "import Mathlib\n\ndef P (n : Nat) : Prop := True\n";

Library numbered_library(std::size_t n) {
  Library lib(kSeed);
  for (std::size_t i = 0; i < n; ++i) {
    lib.append(TheoremStatement::parse("theorem e" + std::to_string(i) + " : P " + std::to_string(i) + " := sorry"),
               ProofScript("by trivial"), Provenance::cpl, "1970-01-01T00:00:00Z");
  }
  return lib;
}

std::unique_ptr<SessionPool> pool_verifying(const std::vector<std::string>& bodies, std::size_t size = 1) {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& b : bodies)
    rules.push_back({{"op", "proof"}, {"statement", b}, {"proof", "by trivial"}, {"verdict", "verified"}});
  std::vector<std::unique_ptr<VerifierSession>> s;
  for (std::size_t i = 0; i < size; ++i)
    s.push_back(std::make_unique<ScriptedSession>(
        kSeed, ScriptedFixtures::from_json({{"log_misses", false}, {"rules", rules}})));
  return std::make_unique<SessionPool>(std::move(s));
}

TEST(Fraction, RoundsHalfUp) {
  EXPECT_EQ((Fraction{9, 10}.percent()), "90%");
  EXPECT_EQ((Fraction{1, 3}.percent()), "33%");
  EXPECT_EQ((Fraction{2, 3}.percent()), "67%");
  EXPECT_EQ((Fraction{1, 8}.percent()), "13%");
  EXPECT_EQ((Fraction{1, 200}.percent()), "1%");
  EXPECT_EQ((Fraction{0, 0}.percent()), "n/a");
  EXPECT_EQ((Fraction{9, 10}.exact()), "9/10");
}

TEST(Reprove, NineOfTen) {
  auto lib = numbered_library(10);
  std::vector<std::string> bodies;
  for (int i = 0; i < 9; ++i) bodies.push_back("P " + std::to_string(i));
  auto pool = pool_verifying(bodies);
  auto provider = std::make_shared<test::FnProvider>([](const ChatRequest&, std::size_t) { return "by trivial"; });
  ChatGateway gateway(provider, test::quiet_options());
  MemorySink events;
  ReproveOptions o;
  o.prover.max_trials = 1;
  auto r = reprove_all(lib, ReproveMode::with_context, *pool, gateway, o, events);
  EXPECT_EQ(r.total(), 10u);
  EXPECT_EQ(r.success_count(), 9u);
  EXPECT_EQ(r.success_rate().percent(), "90%");
  EXPECT_EQ(r.per_theorem.back().status, ProofStatus::failed_exhausted);
  EXPECT_EQ(events.count(EventKind::reprove_result), 10u);
  EXPECT_EQ(ReproveReport::from_events(events.events(), "reprove_all", ReproveMode::with_context).per_theorem,
            r.per_theorem);
}

TEST(Reprove, WithContextSeesOnlyEarlierEntries) {
  auto lib = numbered_library(6);
  auto pool = pool_verifying({});
  auto provider = std::make_shared<test::FnProvider>([](const ChatRequest&, std::size_t) { return ""; });
  ChatGateway gateway(provider, test::quiet_options());
  MemorySink events;
  auto r = reprove_all(lib, ReproveMode::with_context, *pool, gateway, {}, events);
  ASSERT_EQ(provider->requests.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(r.per_theorem[i].context_entries, i);
    EXPECT_EQ(r.per_theorem[i].status, ProofStatus::declared_unprovable);
    const auto& user = provider->requests[i].user_content;
    for (std::size_t j = 0; j < 6; ++j) {
      bool present = user.find("theorem e" + std::to_string(j) + " : P " + std::to_string(j) + " := by trivial") !=
                     std::string::npos;
      EXPECT_EQ(present, j < i) << "entry " << i << " context mentions proof of " << j;
    }
  }
  EXPECT_NE(r.per_theorem[0].context_hash, r.per_theorem[1].context_hash);
}

TEST(Reprove, DefinitionsOnlyUsesSeed) {
  auto lib = numbered_library(4);
  auto pool = pool_verifying({});
  auto provider = std::make_shared<test::FnProvider>([](const ChatRequest&, std::size_t) { return ""; });
  ChatGateway gateway(provider, test::quiet_options());
  MemorySink events;
  auto r = reprove_all(lib, ReproveMode::definitions_only, *pool, gateway, {}, events);
  for (const auto& item : r.per_theorem) {
    EXPECT_EQ(item.context_entries, 0u);
    EXPECT_EQ(item.context_hash, r.per_theorem[0].context_hash);
  }
  for (const auto& q : provider->requests) EXPECT_EQ(q.user_content.find(":= by trivial"), std::string::npos);
}

TEST(Reprove, EmptyLibraryIsAnError) {
  auto pool = pool_verifying({});
  ChatGateway gateway(test::replay({}), test::quiet_options());
  MemorySink events;
  EXPECT_ANY_THROW(reprove_all(Library(kSeed), ReproveMode::with_context, *pool, gateway, {}, events));
}

TEST(Reprove, FocusedRecordsEveryOutcome) {
  auto pool = pool_verifying({"P 99"});
  auto provider = std::make_shared<test::FnProvider>([](const ChatRequest&, std::size_t call) -> std::string {
    switch (call % 4) {
      case 0: return "";
      case 1: return "by trivial";
      case 2: return "by simp";
      default: throw TransportError("connection reset");
    }
  });
  auto opts = test::quiet_options();
  opts.retry.max_attempts = 1;
  ChatGateway gateway(provider, opts);
  MemorySink events;
  ReproveOptions o;
  o.prover.max_trials = 1;
  o.prover.variant = PromptVariant::is_false;
  auto r = reprove_focused(TheoremStatement::parse("theorem goal : P 99 := sorry"), numbered_library(3), 8,
                           ReproveMode::with_context, *pool, gateway, o, events);
  EXPECT_EQ(r.total(), 8u);
  EXPECT_EQ(r.count(ProofStatus::declared_unprovable), 2u);
  EXPECT_EQ(r.count(ProofStatus::verified), 2u);
  EXPECT_EQ(r.count(ProofStatus::failed_exhausted), 4u);
  EXPECT_EQ(r.transport_failures(), 2u);
  EXPECT_EQ(r.success_rate().percent(), "25%");
  for (const auto& item : r.per_theorem) EXPECT_EQ(item.context_entries, 3u);
  EXPECT_EQ(provider->requests[0].system_prompt, PromptSet::defaults().prover_false);
}

TEST(Histogram, SmallExample) {
  std::vector<std::size_t> lengths{3, 12, 19};
  auto bins = histogram(lengths, 10);
  EXPECT_EQ(bins, (std::vector<HistogramBin>{{0, 1}, {10, 2}}));
  EXPECT_EQ(histogram_csv(bins, 10), "bin_start,bin_end,count\n0,10,1\n10,20,2\n");
  EXPECT_THROW(histogram(lengths, 0), ConfigError);
  EXPECT_TRUE(histogram({}, 10).empty());
}

TEST(HistogramProperties, Conservation) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::size_t> lengths(rng() % 40);
    for (auto& l : lengths) l = rng() % 250;
    std::size_t width = 1 + rng() % 25;
    auto bins = histogram(lengths, width);
    std::size_t total = 0;
    for (std::size_t i = 0; i < bins.size(); ++i) {
      EXPECT_GT(bins[i].count, 0u);
      EXPECT_EQ(bins[i].start % width, 0u);
      if (i) EXPECT_LT(bins[i - 1].start, bins[i].start);
      std::size_t in_bin = 0;
      for (auto l : lengths) in_bin += l >= bins[i].start && l < bins[i].start + width;
      EXPECT_EQ(in_bin, bins[i].count);
      total += bins[i].count;
    }
    EXPECT_EQ(total, lengths.size());
  }
}

TEST(Nl, UserContentIsSeedThenStatement) {
  EXPECT_EQ(nl_user_content("def A := 1\n", "Show it."), "def A := 1\n\nShow it.");
  EXPECT_EQ(nl_user_content("def A := 1", "Show it."), "def A := 1\n\nShow it.");
}

TEST(Nl, SessionGradingAndAudit) {
  test::TempDir dir;
  auto provider = std::make_shared<test::FnProvider>([](const ChatRequest& r, std::size_t call) -> std::string {
    EXPECT_EQ(r.role, Role::nl_prover);
    if (call == 0) return "False";
    if (call == 2) throw TransportError("timeout");
    return "Let A and B be alpha-open...";
  });
  auto opts = test::quiet_options();
  opts.retry.max_attempts = 1;
  ChatGateway gateway(provider, opts);
  NlStore store(dir.path());
  MemorySink events;
  NlSessionOptions o;
  o.repetitions = 4;
  o.statement_text = "Prove it.";
  auto rs = nl_session(kSeed, store, gateway, o, events);
  ASSERT_EQ(rs.size(), 4u);
  EXPECT_EQ(rs[0].id, "r01");
  EXPECT_TRUE(rs[2].failed_fetch);
  EXPECT_EQ(events.count(EventKind::nl_response), 4u);
  EXPECT_EQ(provider->requests[0].user_content, nl_user_content(kSeed, "Prove it."));

  auto b = store.breakdown();
  EXPECT_EQ(b.responses, 4u);
  EXPECT_EQ(b.failed_fetches, 1u);
  EXPECT_EQ(b.pending, (std::vector<std::string>{"r02", "r04"}));
  EXPECT_THROW(store.finalize(), InvariantError);
  EXPECT_THROW(store.grade("r09", NlCategory::gap, "me", "", "t"), ConfigError);
  EXPECT_THROW(store.grade("r03", NlCategory::gap, "me", "", "t"), ConfigError);

  store.grade("r02", NlCategory::gap, "me", "missing step", "t1");
  store.grade("r04", NlCategory::gap, "me", "", "t2");
  store.grade("r02", NlCategory::correctly_proven, "me", "step is fine", "t3");
  EXPECT_EQ(store.grade_history().size(), 4u);
  EXPECT_EQ(store.current_grades().at("r02").category, NlCategory::correctly_proven);
  auto lines = test::lines_of(dir / "grades.jsonl");
  EXPECT_EQ(nlohmann::json::parse(lines.back()).at("supersedes"), "gap");

  auto f = store.finalize();
  EXPECT_EQ(f.graded(), 3u);
  EXPECT_EQ(f.rate(NlCategory::correctly_proven).exact(), "1/3");
  EXPECT_EQ(f.rate(NlCategory::gap).percent(), "33%");
  EXPECT_EQ(f.rate(NlCategory::rejected_as_false).percent(), "33%");

  // a fresh store over the same directory sees the same state
  NlStore again(dir.path());
  EXPECT_EQ(again.finalize().to_json(), f.to_json());
}

TEST(Report, NamesMissingLog) {
  test::TempDir dir;
  try {
    emit_reports(dir.path());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(kEventsFile), std::string::npos);
  }
  test::spit(dir / kEventsFile, "");
  try {
    emit_reports(dir.path());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(kTranscriptFile), std::string::npos);
  }
}

TEST(Report, TotalsMatchEvents) {
  test::TempDir dir;
  auto c = load_config(test::fixture("cpl3/config.json"));
  c.output_dir = dir / "run";
  auto result = run_generation(c);
  auto report = nlohmann::json::parse(test::slurp(dir / "run" / kReportFile));
  auto s = summarize_events(EventLog::read(dir / "run" / kEventsFile));
  EXPECT_TRUE(s.complete);
  EXPECT_EQ(s.loops_completed, 3u);
  EXPECT_EQ(s.theorems_added, result.library.size());
  EXPECT_EQ(s.conjectures_accepted, 6u);
  EXPECT_EQ(s.proof_attempts, 9u);
  EXPECT_EQ(s.rejections.at("duplicate"), 1u);
  EXPECT_EQ(s.rejections.at("invalid"), 1u);
  EXPECT_EQ(s.rejections.at("known"), 2u);
  EXPECT_EQ(s.proof_outcomes.at("verified"), 4u);
  EXPECT_EQ(s.proof_outcomes.at("declared_unprovable"), 1u);
  EXPECT_EQ(s.proof_outcomes.at("failed_exhausted"), 1u);
  EXPECT_EQ(report.dump().find("prover_calls_match_attempts\":false"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "run" / "histogram.csv"));
  EXPECT_EQ(transcript_call_counts(dir / "run" / kTranscriptFile).at("prover"), 9u);
}

}  // namespace
}  // namespace cpl
