#include <gtest/gtest.h>

#include <random>

#include "cpl/core/library.hpp"
#include "cpl/core/proof_length.hpp"
#include "cpl/core/text.hpp"
#include "cpl/error.hpp"
#include "support.hpp"

namespace cpl {
namespace {

LibraryEntry published_entry() {
  auto text = test::slurp(test::fixture("published_proof.lean"));
  auto d = parse_proved_declaration(text);
  return {d->statement, ProofScript(d->proof_text), 0, Provenance::cpl, ""};
}

TEST(ProofLength, PublishedIntersectionProof) {
  // Oracle: awk over the fixture counting non-blank lines that do not start
  // with "--", starting at `by` -> 64. Characters: non-whitespace code
  // points outside comments, counted in Python -> 1791.
  auto e = published_entry();
  EXPECT_EQ(proof_length(e.proof), 64u);
  EXPECT_EQ(proof_length(e.proof, LengthMetric::lines), 64u);
  EXPECT_EQ(proof_length(e.proof, LengthMetric::chars), 1791u);
}

TEST(ProofLength, SmallCases) {
  EXPECT_EQ(proof_length(ProofScript("by simp")), 1u);
  EXPECT_EQ(proof_length(ProofScript("by\n  -- comment\n\n  simp\n  /- block\n  comment -/\n  rfl")), 3u);
  EXPECT_EQ(proof_length(ProofScript("fun x hx => hx"), LengthMetric::chars), 10u);
}

TEST(ProofLengthProperties, InvariantUnderCommentsAndBlankLines) {
  std::mt19937 rng(7);
  const char* steps[] = {"intro x hx", "simp", "exact ⟨h, h'⟩", "rcases h with ⟨a, b⟩", "apply foo"};
  for (int trial = 0; trial < 300; ++trial) {
    std::string plain = "by";
    std::string noisy = "by";
    int n = std::uniform_int_distribution<int>(1, 12)(rng);
    for (int k = 0; k < n; ++k) {
      std::string step = steps[rng() % 5];
      plain += "\n  " + step;
      if (rng() % 2) noisy += "\n";
      if (rng() % 2) noisy += "\n  -- note " + std::to_string(k);
      if (rng() % 3 == 0) noisy += "\n  /- multi\n     line -/";
      noisy += "\n  " + step;
    }
    EXPECT_EQ(proof_length(ProofScript(plain)), static_cast<std::size_t>(n + 1));
    EXPECT_EQ(proof_length(ProofScript(noisy)), proof_length(ProofScript(plain)));
    EXPECT_EQ(proof_length(ProofScript(noisy), LengthMetric::chars),
              proof_length(ProofScript(plain), LengthMetric::chars));
  }
}

TEST(Library, AppendRenamesCollisions) {
  Library lib("seed\n");
  auto s = TheoremStatement::parse("theorem t : 1 = 1 := sorry");
  lib.append(s, ProofScript("rfl"), Provenance::cpl, "ts0");
  const auto& e = lib.append(s, ProofScript("by rfl"), Provenance::cpl, "ts1");
  EXPECT_EQ(e.statement.name(), "t_1");
  EXPECT_EQ(e.sequence_index, 1u);
  EXPECT_TRUE(lib.contains_name("t_1"));
  EXPECT_EQ(lib.prefix(1).size(), 1u);
}

TEST(LibraryFile, RoundTripsAndRejectsTampering) {
  test::TempDir dir;
  Library lib(test::slurp(test::fixture("seed.lean")));
  lib.append(TheoremStatement::parse("theorem a : 1 = 1 := sorry"), ProofScript("rfl"), Provenance::cpl,
             "1970-01-01T00:00:05Z");
  auto e = published_entry();
  lib.append(e.statement, e.proof, Provenance::simple_loop, "1970-01-01T00:00:09Z");
  auto path = dir / "library.lean";
  write_library_file(lib, path);
  EXPECT_EQ(read_library_file(path), lib);
  auto text = test::slurp(path);
  EXPECT_EQ(text.rfind(lib.seed_source(), 0), 0u);
  EXPECT_NE(text.find("-- [cpl:entry 1 simple_loop 1970-01-01T00:00:09Z]"), std::string::npos);

  auto tampered = text;
  tampered.replace(tampered.find("cpl:entry 1"), 11, "cpl:entry 7");
  EXPECT_THROW(parse_library_file(tampered), ConsistencyError);
  auto with_sorry = text;
  with_sorry.replace(with_sorry.find(":= rfl"), 6, ":= sorry");
  EXPECT_THROW(parse_library_file(with_sorry), ConsistencyError);
}

TEST(RenderContext, BudgetFixture) {
  // seed: 10 characters; entries render as "\n<decl>\n" after the seed.
  // Each decl "theorem tK : 1 = 1 := rfl" is 25 characters, so each entry
  // costs 27. Extras render with sorry: "theorem c : 2 = 2 := sorry" (26 + 2).
  Library lib("seed text\n");
  for (int k = 0; k < 4; ++k) {
    lib.append(TheoremStatement::parse("theorem t" + std::to_string(k) + " : 1 = 1 := sorry"), ProofScript("rfl"),
               Provenance::cpl, "");
  }
  std::vector<TheoremStatement> extra{TheoremStatement::parse("theorem c : 2 = 2 := sorry")};
  auto full = render_context(lib, extra, 1000);
  EXPECT_EQ(text::utf8_length(full.text), 10u + 4 * 27 + 28);  // 146
  EXPECT_EQ(full.dropped_entries, 0u);
  EXPECT_EQ(full.library_length, 10u + 4 * 27);

  // 100 characters: 10 + 28 leaves room for two entries (54), not three (81).
  auto cut = render_context(lib, extra, 100);
  EXPECT_EQ(cut.dropped_entries, 2u);
  EXPECT_EQ(text::utf8_length(cut.text), 10u + 2 * 27 + 28);
  EXPECT_EQ(cut.text.find("theorem t0"), std::string::npos);
  EXPECT_NE(cut.text.find("theorem t2"), std::string::npos);
  EXPECT_FALSE(cut.warnings.empty());

  EXPECT_THROW(render_context(lib, extra, 37), ContextError);
  EXPECT_EQ(render_context(lib, extra, 38).dropped_entries, 4u);
  EXPECT_EQ(render_context(Library("seed text\n"), {}, 1000).text, "seed text\n");
}

TEST(RenderContextProperties, OrderAndPrefix) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    Library lib("import Mathlib\n");
    int n = std::uniform_int_distribution<int>(0, 15)(rng);
    for (int k = 0; k < n; ++k) {
      lib.append(TheoremStatement::parse("theorem e" + std::to_string(k) + " : " + std::to_string(k) +
                                         " = " + std::to_string(k) + " := sorry"),
                 ProofScript("rfl"), Provenance::cpl, "");
    }
    std::size_t budget = std::uniform_int_distribution<std::size_t>(60, 600)(rng);
    std::vector<TheoremStatement> extras{TheoremStatement::parse("theorem goal : True := sorry")};
    auto r = render_context(lib, extras, budget);
    EXPECT_LE(text::utf8_length(r.text), budget);
    EXPECT_EQ(r.text.rfind(lib.seed_source(), 0), 0u);
    EXPECT_NE(r.text.find("theorem goal : True := sorry"), std::string::npos);
    // surviving entries are exactly the newest ones, in sequence order
    std::size_t last = 0;
    for (int k = 0; k < n; ++k) {
      auto pos = r.text.find("theorem e" + std::to_string(k) + " ");
      if (k < static_cast<int>(r.dropped_entries)) {
        EXPECT_EQ(pos, std::string::npos);
      } else {
        ASSERT_NE(pos, std::string::npos);
        EXPECT_GT(pos, last);
        last = pos;
      }
    }
    EXPECT_LT(last, r.text.find("theorem goal"));
  }
}

}  // namespace
}  // namespace cpl
