#include <gtest/gtest.h>

#include <random>

#include "cpl/core/statement.hpp"
#include "cpl/core/text.hpp"
#include "cpl/error.hpp"
#include "support.hpp"

namespace cpl {
namespace {

TEST(TheoremStatement, BodyKeepsBinders) {
  auto s = TheoremStatement::parse("theorem isOpen_alphaOpen {A : Set X} (hA : IsOpen A) :\n    AlphaOpen A := sorry");
  EXPECT_EQ(s.name(), "isOpen_alphaOpen");
  EXPECT_TRUE(s.has_binders());
  EXPECT_EQ(normalize_statement(s), "{A : Set X} (hA : IsOpen A) : AlphaOpen A");
  EXPECT_EQ(s.with_proof("by simp"),
            "theorem isOpen_alphaOpen {A : Set X} (hA : IsOpen A) :\n    AlphaOpen A := by simp");
  EXPECT_EQ(s.as_example("by exact?"), "example {A : Set X} (hA : IsOpen A) :\n    AlphaOpen A := by exact?");
}

TEST(TheoremStatement, BodyWithoutBindersIsTheType) {
  auto s = TheoremStatement::parse("theorem t : 1 = 1 := sorry");
  EXPECT_FALSE(s.has_binders());
  EXPECT_EQ(s.body(), "1 = 1");
  EXPECT_EQ(s.source_text(), "theorem t : 1 = 1 := sorry");
  EXPECT_EQ(TheoremStatement::from_type("t", "1 = 1"), s);
  EXPECT_EQ(s.renamed("u").source_text(), "theorem u : 1 = 1 := sorry");
  EXPECT_EQ(normalize_statement(s), normalize_statement(s.renamed("u")));
}

TEST(TheoremStatement, RejectsMalformed) {
  EXPECT_THROW(TheoremStatement::parse("theorem t : 1 = 1 := by rfl"), InvariantError);
  EXPECT_THROW(TheoremStatement::parse("lemma t : 1 = 1 := sorry"), InvariantError);
  EXPECT_THROW(TheoremStatement::parse("theorem t : 1 = 1"), InvariantError);
  EXPECT_THROW(TheoremStatement::parse("theorem a : P := sorry\ntheorem b : Q := sorry"), InvariantError);
}

TEST(ProofScript, RejectsEmptyAndSorry) {
  EXPECT_THROW(ProofScript(""), InvariantError);
  EXPECT_THROW(ProofScript("  \n"), InvariantError);
  EXPECT_THROW(ProofScript("by\n  sorry"), InvariantError);
  EXPECT_TRUE(ProofScript::violation("by\n  exact (sorry)").has_value());
  EXPECT_FALSE(ProofScript::violation("by\n  -- no sorry here\n  simp").has_value());
  EXPECT_EQ(ProofScript("  by simp \n").text(), "by simp");
}

TEST(Parse, ConjecturerResponseWithProseFencesAndRemarks) {
  auto r = parse_theorem_declarations(test::slurp(test::fixture("conjecturer_response.txt")));
  ASSERT_EQ(r.statements.size(), 3u);
  EXPECT_EQ(r.statements[0].name(), "alphaOpen_univ");
  EXPECT_EQ(r.statements[1].name(), "isOpen_alphaOpen");
  EXPECT_EQ(r.statements[2].name(), "preOpen_empty");
  ASSERT_EQ(r.skipped.size(), 1u);
  EXPECT_NE(r.skipped[0].text.find("alphaOpen_semiOpen"), std::string::npos);
  // the prose line starting with "Remark" is not a declaration
  for (const auto& s : r.statements) EXPECT_EQ(s.source_text().find("Remark"), std::string::npos);
}

TEST(Parse, ProseStartingWithTheoremIsIgnored) {
  auto r = parse_theorem_declarations("theorem of Pythagoras is nice\ntheorem p : True := sorry\n");
  ASSERT_EQ(r.statements.size(), 1u);
  EXPECT_EQ(r.statements[0].name(), "p");
}

TEST(Parse, EmptyResponseYieldsNothing) {
  auto r = parse_theorem_declarations("");
  EXPECT_TRUE(r.statements.empty());
  EXPECT_TRUE(r.skipped.empty());
}

TEST(Fences, UnterminatedFenceWarns) {
  auto s = strip_code_fences("```lean\ntheorem p : True := sorry\n");
  EXPECT_EQ(s.text, "theorem p : True := sorry\n");
  ASSERT_EQ(s.warnings.size(), 1u);
  EXPECT_NE(s.warnings[0].find("unterminated"), std::string::npos);
}

TEST(Fences, TaggedFenceInsideBlockWarns) {
  auto s = strip_code_fences("```lean\na\n```lean\nb\n```\n");
  EXPECT_FALSE(s.warnings.empty());
}

TEST(ProvedDeclaration, SplitsStatementAndProof) {
  auto d = parse_proved_declaration("Here you go:\ntheorem p {A : Set X} : A ⊆ A := by\n  intro x hx\n  exact hx\n");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->statement.name(), "p");
  EXPECT_EQ(d->proof_text, "by\n  intro x hx\n  exact hx");
  EXPECT_FALSE(parse_proved_declaration("no declarations here"));
}

TEST(ScanDeclarations, FindsEveryTheoremWhateverItsProof) {
  auto ds = scan_declarations("def f := 1\ntheorem a : P := by simp\n\ntheorem b : Q := sorry\n");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds[0].proof_text, "by simp");
  EXPECT_EQ(ds[1].statement.name(), "b");
}

// Hand-rolled generator of well-formed declarations.
struct DeclGen {
  std::mt19937 rng;
  std::string pick(std::initializer_list<const char*> xs) {
    std::vector<const char*> v(xs);
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  }
  std::string ws() { return pick({" ", "  ", "\n    ", " \n  "}); }
  std::string decl(int i) {
    std::string name = pick({"foo", "alpha_open", "x'", "lemma₁", "Set.bar"}) + std::to_string(i);
    std::string binders;
    int n = std::uniform_int_distribution<int>(0, 3)(rng);
    for (int k = 0; k < n; ++k) {
      binders += ws() + pick({"{A : Set X}", "(h : A ⊆ B)", "[TopologicalSpace Y]", "⦃x : X⦄", "(f : ℕ → ℕ)"});
    }
    std::string type = pick({"1 = 1", "AlphaOpen (A ∩ B)", "∀ x : ℕ, x + 0 = x", "(fun y => y) = id",
                             "interior (closure A) ⊆ closure A"});
    return "theorem " + name + binders + ws() + ":" + ws() + type + ws() + ":=" + ws() + "sorry";
  }
};

TEST(StatementProperties, ParseRoundTripAndNormalizeIdempotence) {
  DeclGen gen{std::mt19937(1234)};
  for (int i = 0; i < 500; ++i) {
    auto src = gen.decl(i);
    auto s = TheoremStatement::parse(src);
    // source_text is canonical: parsing it again is a fixed point
    auto again = TheoremStatement::parse(s.source_text());
    EXPECT_EQ(again, s) << src;
    auto key = normalize_statement(s);
    EXPECT_EQ(text::collapse_whitespace(key), key);
    EXPECT_EQ(normalize_statement(TheoremStatement::parse(s.renamed("other").source_text())), key);
    // embedding in prose and fences does not change what is extracted
    auto r = parse_theorem_declarations("Some prose.\n```lean\n" + src + "\n```\nMore prose.");
    ASSERT_EQ(r.statements.size(), 1u) << src;
    EXPECT_EQ(r.statements[0], s);
  }
}

}  // namespace
}  // namespace cpl
