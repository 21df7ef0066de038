#include <gtest/gtest.h>

#include <algorithm>

#include "sp/sp.hpp"
#include "support/fixtures.hpp"

using namespace sp;
using sp_test::joined;

namespace {

SPPattern new_of(const char* text) { return make_new_pattern(split_tokens(text)); }

std::vector<std::string> lines_of(const std::vector<SPPattern>& ps) {
  std::vector<std::string> out;
  for (const auto& p : ps) out.push_back(format_pattern_line(p));
  return out;
}

// New "t h a t b o y r u n s" over the stored "t h a t g i r l r u n s",
// matched on "t h a t" and "r u n s".
Alignment boy_over_girl() {
  FreshIds stored(90);
  const auto girl = wholesale_pattern(new_of("t h a t g i r l r u n s"), stored);
  MatchHypothesis m;
  for (int i = 0; i < 4; ++i) m.pairs.emplace_back(i, i + 1);
  for (int i = 0; i < 4; ++i) m.pairs.emplace_back(7 + i, 9 + i);
  return merge(degenerate_alignment(new_of("t h a t b o y r u n s")), girl, m);
}

const LearnResult& demo_result() {
  static const LearnResult r = learn(load_corpus(sp_test::data_path("learn_demo.spn")), LearnParams{});
  return r;
}

}  // namespace

TEST(DerivePatterns, SegmentsAndDisjunction) {
  FreshIds ids(1);
  const auto out = derive_patterns(boy_over_girl(), ids);
  EXPECT_EQ(lines_of(out), (std::vector<std::string>{
                               "%1 : t h a t #%1",
                               "%2 0 : b o y #%2",
                               "%2 1 : g i r l #%2",
                               "%3 : r u n s #%3",
                               "%4 : %1 #%1 %2 #%2 %3 #%3 #%4",
                           }));
  for (const auto& p : out) {
    EXPECT_NO_THROW(check_pattern(p));
    EXPECT_EQ(p.provenance, Provenance::Learned);
    EXPECT_EQ(p.role, Role::Old);
  }
  EXPECT_EQ(out[1].pattern_id, "%2.0");
  EXPECT_EQ(ids.peek(), 5);
}

TEST(DerivePatterns, IdenticalRowsGiveOneSegment) {
  FreshIds stored(50), ids(1);
  const auto old_p = wholesale_pattern(new_of("x y z"), stored);
  MatchHypothesis m{{{0, 1}, {1, 2}, {2, 3}}, 3};
  const auto a = merge(degenerate_alignment(new_of("x y z")), old_p, m);
  const auto out = derive_patterns(a, ids);
  EXPECT_EQ(lines_of(out), (std::vector<std::string>{"%1 : x y z #%1", "%2 : %1 #%1 #%2"}));

  CandidatePool pool;
  for (int rep = 0; rep < 2; ++rep) {
    FreshIds again(1);
    for (const auto& p : derive_patterns(a, again)) pool = unify_into_pool(pool, p);
  }
  ASSERT_EQ(pool.patterns.size(), 2u);
  EXPECT_EQ(pool.patterns[0].frequency, 2);
}

TEST(DerivePatterns, GapAtTheEndGetsAnEmptyMember) {
  FreshIds stored(50), ids(1);
  const auto old_p = wholesale_pattern(new_of("a b"), stored);
  const auto a = merge(degenerate_alignment(new_of("a b c")), old_p, MatchHypothesis{{{0, 1}, {1, 2}}, 2});
  EXPECT_EQ(lines_of(derive_patterns(a, ids)),
            (std::vector<std::string>{"%1 : a b #%1", "%2 0 : c #%2", "%2 1 : #%2",
                                      "%3 : %1 #%1 %2 #%2 #%3"}));
}

TEST(DerivePatterns, Errors) {
  FreshIds ids(1);
  EXPECT_THROW(derive_patterns(degenerate_alignment(new_of("a b")), ids), Error);
  EXPECT_THROW(derive_patterns(sp_test::fortune_parse(), ids), Error);
}

TEST(CandidatePool, Unification) {
  const auto p = make_old_pattern("x", split_tokens("A a b"), 1);
  const auto q = make_old_pattern("y", split_tokens("A a c"), 1);
  CandidatePool pool;
  pool = unify_into_pool(pool, p);
  const auto before = pool;
  pool = unify_into_pool(pool, p);
  EXPECT_EQ(before.patterns.front().frequency, 1);  // value semantics
  ASSERT_EQ(pool.patterns.size(), 1u);
  EXPECT_EQ(pool.patterns.front().frequency, 2);
  pool = unify_into_pool(pool, q);
  EXPECT_EQ(pool.patterns.size(), 2u);
  CandidatePool many;
  for (int i = 0; i < 7; ++i) many = unify_into_pool(many, q);
  EXPECT_EQ(many.patterns.front().frequency, 7);
  // Same tokens, different prefix length: distinct.
  many = unify_into_pool(many, make_old_pattern("z", split_tokens("A a c"), 2));
  EXPECT_EQ(many.patterns.size(), 2u);
}

TEST(GrammarCost, Examples) {
  EXPECT_DOUBLE_EQ(grammar_cost(Grammar{}), 0);
  Grammar one;
  one.add(make_old_pattern("x", split_tokens("A a b c d e"), 1));
  std::map<std::string, double> four;
  for (const auto& t : split_tokens("A a b c d e")) four[t] = 4;
  EXPECT_DOUBLE_EQ(grammar_cost(one, CostModel(CostModelKind::Uniform, four)), 24);

  // 65 symbols over a 35-token alphabet: 6 bits each.
  const auto g = sp_test::fortune_grammar();
  std::size_t symbols = 0;
  for (const auto& p : g.patterns) symbols += p.size();
  EXPECT_EQ(symbols, 65u);
  EXPECT_DOUBLE_EQ(grammar_cost(g), 65 * 6.0);
}

TEST(CorpusEncodingCost, Examples) {
  Grammar g;
  g.add(parse_pattern_line("D 8 : t h e #D", Role::Old));
  EXPECT_DOUBLE_EQ(corpus_encoding_cost(g, {}), 0);
  const std::vector<SPPattern> the{new_of("t h e")};
  const double c = learning_cost_model(g, the).cost("t");
  EXPECT_DOUBLE_EQ(corpus_encoding_cost(g, the), 2 * c);
  const std::vector<SPPattern> other{new_of("x y"), new_of("z")};
  const double c2 = learning_cost_model(g, other).cost("x");
  EXPECT_DOUBLE_EQ(corpus_encoding_cost(g, other), 3 * c2);
}

TEST(Learn, SinglePatternIsStoredWholesale) {
  const std::vector<SPPattern> corpus{new_of("x y z")};
  const auto res = learn(corpus, LearnParams{});
  const auto& best = res.grammars.front();
  ASSERT_EQ(best.grammar.size(), 1u);
  EXPECT_EQ(format_pattern_line(best.grammar.patterns.front()), "%1 : x y z #%1");
  const double c = learning_cost_model(best.grammar, corpus).cost("x");
  EXPECT_DOUBLE_EQ(best.e, c);
  EXPECT_DOUBLE_EQ(best.g, 5 * c);
  EXPECT_DOUBLE_EQ(best.t, best.g + best.e);
}

TEST(Learn, DisjointPatternsAreBothStoredWholesale) {
  const std::vector<SPPattern> corpus{new_of("a b c"), new_of("x y")};
  const auto res = learn(corpus, LearnParams{});
  const auto& g = res.grammars.front().grammar;
  EXPECT_EQ(lines_of(g.patterns), (std::vector<std::string>{"%1 : a b c #%1", "%2 : x y #%2"}));
}

TEST(Learn, Errors) {
  EXPECT_THROW(learn({}, LearnParams{}), Error);
  LearnParams p;
  p.grammar_beam = 0;
  const std::vector<SPPattern> corpus{new_of("a")};
  EXPECT_THROW(learn(corpus, p), Error);
}

TEST(Learn, DeterministicFreshNames) {
  const std::vector<SPPattern> corpus{new_of("a b c d"), new_of("a b x d"), new_of("a b c d")};
  LearnParams p;
  p.id_seed = 7;
  const auto r1 = learn(corpus, p);
  const auto r2 = learn(corpus, p);
  ASSERT_EQ(r1.grammars.size(), r2.grammars.size());
  for (std::size_t i = 0; i < r1.grammars.size(); ++i) {
    EXPECT_EQ(format_grammar(r1.grammars[i].grammar), format_grammar(r2.grammars[i].grammar));
    EXPECT_DOUBLE_EQ(r1.grammars[i].t, r2.grammars[i].t);
  }
  for (const auto& pat : r1.grammars.front().grammar.patterns) {
    EXPECT_NO_THROW(check_pattern(pat));
    EXPECT_EQ(pat.symbols.front().front(), '%');
    EXPECT_GE(std::stol(pat.symbols.front().substr(1)), 7);
  }
  for (std::size_t i = 1; i < r1.grammars.size(); ++i)
    EXPECT_LE(r1.grammars[i - 1].t, r1.grammars[i].t + 1e-9);
}

TEST(Learn, TwoSentencesBeatTheWholesaleBaseline) {
  const auto corpus = load_corpus(sp_test::data_path("learn_demo.spn"));
  const auto& best = demo_result().grammars.front();
  const auto base = baseline_grammar(corpus, LearnParams{});
  EXPECT_LT(best.t, base.t);
  EXPECT_DOUBLE_EQ(best.t, 76);
  EXPECT_DOUBLE_EQ(base.t, 145);
}

TEST(Learn, TwoSentencesYieldSharedSegments) {
  // Expected: patterns holding exactly "t h a t" and "r u n s" in the best
  // grammar.
  const auto& g = demo_result().grammars.front().grammar;
  auto has_segment = [&](const char* body) {
    return std::any_of(g.patterns.begin(), g.patterns.end(), [&](const SPPattern& p) {
      if (p.size() < p.id_prefix_len + 2) return false;
      const std::vector<std::string> inner(p.symbols.begin() + static_cast<std::ptrdiff_t>(p.id_prefix_len),
                                           p.symbols.end() - 1);
      return joined(inner) == body;
    });
  };
  EXPECT_TRUE(has_segment("t h a t")) << format_grammar(g);
  EXPECT_TRUE(has_segment("r u n s")) << format_grammar(g);
}

TEST(Learn, EarlierCorpusStillCompressesAfterLaterLearning) {
  const auto c1 = load_corpus(sp_test::data_path("forget_c1.spn"));
  const auto c2 = load_corpus(sp_test::data_path("forget_c2.spn"));
  const LearnParams p;
  const auto first = learn(c1, p);
  const auto second = learn(c2, p, first.grammars.front().grammar);
  const auto& g = second.grammars.front().grammar;
  for (const auto& m : c1) {
    const std::vector<SPPattern> one{m};
    const auto out = build_alignments(m, g, SearchParams{}, learning_cost_model(g, one));
    ASSERT_FALSE(out.empty()) << joined(m.symbols);
    EXPECT_GT(out.front().result.cd, 0) << joined(m.symbols);
  }
  // Fresh names continue past those of the first grammar.
  for (const auto& pat : first.grammars.front().grammar.patterns)
    EXPECT_EQ(std::count_if(g.patterns.begin(), g.patterns.end(),
                            [&](const SPPattern& q) { return q.symbols.front() == pat.symbols.front(); }),
              std::count_if(first.grammars.front().grammar.patterns.begin(),
                            first.grammars.front().grammar.patterns.end(),
                            [&](const SPPattern& q) { return q.symbols.front() == pat.symbols.front(); }));
}
