#include <gtest/gtest.h>

#include <random>
#include <set>

#include "sp/matcher.hpp"

using namespace sp;

namespace {

using Pairs = std::vector<MatchPair>;

std::vector<Pairs> pairs_of(const std::vector<MatchHypothesis>& hs) {
  std::vector<Pairs> out;
  for (const auto& h : hs) out.push_back(h.pairs);
  return out;
}

// Independent brute force: every subset of equal-token cells that is a
// strictly increasing chain and to which no cell can be added.
std::set<Pairs> subset_oracle(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  Pairs cells;
  for (int i = 0; i < static_cast<int>(a.size()); ++i)
    for (int j = 0; j < static_cast<int>(b.size()); ++j)
      if (a[i] == b[j]) cells.emplace_back(i, j);
  auto chain = [](const Pairs& s) {
    for (std::size_t k = 1; k < s.size(); ++k)
      if (s[k].first <= s[k - 1].first || s[k].second <= s[k - 1].second) return false;
    return !s.empty();
  };
  std::set<Pairs> chains;
  for (unsigned mask = 1; mask < (1u << cells.size()); ++mask) {
    Pairs s;
    for (std::size_t k = 0; k < cells.size(); ++k)
      if (mask >> k & 1) s.push_back(cells[k]);
    if (chain(s)) chains.insert(s);
  }
  std::set<Pairs> out;
  for (const auto& s : chains) {
    bool maximal = true;
    for (const auto& c : cells) {
      if (std::find(s.begin(), s.end(), c) != s.end()) continue;
      Pairs t = s;
      t.push_back(c);
      std::sort(t.begin(), t.end());
      if (chains.count(t)) maximal = false;
    }
    if (maximal) out.insert(s);
  }
  return out;
}

std::vector<std::string> random_seq(std::mt19937& rng, std::size_t len, int alphabet) {
  std::vector<std::string> s;
  for (std::size_t i = 0; i < len; ++i) s.push_back(std::string(1, static_cast<char>('a' + rng() % alphabet)));
  return s;
}

}  // namespace

TEST(FindMatches, IdentityRanksFirst) {
  const auto a = split_tokens("a b c");
  const auto hs = find_matches(a, a);
  ASSERT_FALSE(hs.empty());
  EXPECT_EQ(hs.front().pairs, (Pairs{{0, 0}, {1, 1}, {2, 2}}));
  EXPECT_EQ(hs.front().hit_count(), 3u);
}

TEST(FindMatches, CrossedPairsGiveSingleHits) {
  const auto hs = find_matches(split_tokens("a b"), split_tokens("b a"));
  EXPECT_EQ(pairs_of(hs), (std::vector<Pairs>{{{0, 1}}, {{1, 0}}}));
}

TEST(FindMatches, DnaFragment) {
  const auto hs = find_matches(split_tokens("G G A G"), split_tokens("G G C A"));
  const auto ps = pairs_of(hs);
  EXPECT_NE(std::find(ps.begin(), ps.end(), Pairs{{0, 0}, {1, 1}, {2, 3}}), ps.end());
  EXPECT_EQ(hs.front().hit_count(), 3u);
}

TEST(FindMatches, CostRankingPrefersRareSymbols) {
  // One pair on a costly symbol beats two on cheap ones.
  const TokenCost cost = [](const std::string& t) { return t == "z" ? 5.0 : 1.0; };
  const auto hs = find_matches(split_tokens("a a z"), split_tokens("z a a"), {}, cost);
  EXPECT_EQ(hs.front().pairs, (Pairs{{2, 0}}));
  EXPECT_DOUBLE_EQ(hs.front().cost, 5.0);
}

TEST(FindMatches, LimitsAndErrors) {
  const auto a = split_tokens("a a a a");
  EXPECT_EQ(find_matches(a, split_tokens("a a"), {3, 1}).size(), 3u);
  EXPECT_TRUE(find_matches(split_tokens("a b"), split_tokens("b a"), {10, 2}).empty());
  EXPECT_THROW(find_matches({}, a), Error);
  EXPECT_THROW(find_matches(a, {}), Error);
  EXPECT_THROW(find_matches(a, a, {0, 1}), Error);
}

TEST(ExhaustiveMatches, SmallExamples) {
  EXPECT_EQ(pairs_of(exhaustive_matches(split_tokens("a"), split_tokens("a"))),
            (std::vector<Pairs>{{{0, 0}}}));
  const auto two = pairs_of(exhaustive_matches(split_tokens("a a"), split_tokens("a")));
  EXPECT_EQ(std::set<Pairs>(two.begin(), two.end()), (std::set<Pairs>{{{0, 0}}, {{1, 0}}}));
  const auto aba = pairs_of(exhaustive_matches(split_tokens("a b a"), split_tokens("a a")));
  EXPECT_NE(std::find(aba.begin(), aba.end(), Pairs{{0, 0}, {2, 1}}), aba.end());
}

TEST(ExhaustiveMatches, Guard) {
  const std::vector<std::string> a(8, "a"), b(9, "a");
  EXPECT_THROW(exhaustive_matches(a, b), GuardError);
  EXPECT_NO_THROW(exhaustive_matches(a, std::vector<std::string>(8, "b")));
}

TEST(ExhaustiveMatches, AgreesWithSubsetEnumeration) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_seq(rng, 1 + rng() % 5, 3);
    const auto b = random_seq(rng, 1 + rng() % 4, 3);
    const auto got = pairs_of(exhaustive_matches(a, b));
    EXPECT_EQ(std::set<Pairs>(got.begin(), got.end()), subset_oracle(a, b));
  }
}

TEST(FindMatches, TopCostEqualsExhaustiveMaximum) {
  std::mt19937 rng(5);
  const TokenCost cost = [](const std::string& t) { return 1.0 + (t[0] - 'a'); };
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = random_seq(rng, 1 + rng() % 8, 3);
    const auto b = random_seq(rng, 1 + rng() % 8, 3);
    if (a.size() * b.size() > kExhaustiveMatchGuard) continue;
    const auto ex = exhaustive_matches(a, b, cost);
    const auto hs = find_matches(a, b, {50, 1}, cost);
    if (ex.empty()) {
      EXPECT_TRUE(hs.empty());
      continue;
    }
    ASSERT_FALSE(hs.empty());
    EXPECT_NEAR(hs.front().cost, ex.front().cost, 1e-9);
    // Everything returned is a valid maximal matching, listed once.
    const auto all = pairs_of(ex);
    const std::set<Pairs> maximal(all.begin(), all.end());
    std::set<Pairs> seen;
    for (const auto& h : hs) {
      EXPECT_TRUE(is_valid_hypothesis(h, a, b));
      EXPECT_TRUE(maximal.count(h.pairs));
      EXPECT_TRUE(seen.insert(h.pairs).second);
    }
    for (std::size_t i = 1; i < hs.size(); ++i) EXPECT_FALSE(ranks_before(hs[i], hs[i - 1]));
    // With room for all of them, the list is exactly the exhaustive one.
    if (ex.size() <= 50) EXPECT_EQ(pairs_of(hs), all);
  }
}

TEST(FindMatches, Deterministic) {
  const auto a = split_tokens("a b a b c a b");
  const auto b = split_tokens("b a c b a");
  EXPECT_EQ(pairs_of(find_matches(a, b)), pairs_of(find_matches(a, b)));
}
