#pragma once

// Pairwise matching: ranked, order-preserving hit sequences between two
// symbol sequences.

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sp/core.hpp"

namespace sp {

using MatchPair = std::pair<int, int>;  // (pos in seq_a, pos in seq_b)

struct MatchHypothesis {
  std::vector<MatchPair> pairs;
  double cost = 0;  // total cost of the matched symbols

  std::size_t hit_count() const noexcept { return pairs.size(); }
  friend bool operator==(const MatchHypothesis& x, const MatchHypothesis& y) {
    return x.pairs == y.pairs;
  }
};

struct MatchLimits {
  std::size_t max_hypotheses = 200;
  std::size_t min_hits = 1;
};

using TokenCost = std::function<double(const std::string&)>;

inline double unit_cost(const std::string&) { return 1.0; }

inline constexpr double kCostEps = 1e-9;

/// Ranking order: higher cost first, then fewer pairs, then the
/// lexicographically smaller pair list.
inline bool ranks_before(const MatchHypothesis& x, const MatchHypothesis& y) {
  if (std::abs(x.cost - y.cost) > kCostEps) return x.cost > y.cost;
  if (x.pairs.size() != y.pairs.size()) return x.pairs.size() < y.pairs.size();
  return x.pairs < y.pairs;
}

inline bool is_valid_hypothesis(const MatchHypothesis& h, std::span<const std::string> a,
                                std::span<const std::string> b) {
  if (h.pairs.empty()) return false;
  for (std::size_t i = 0; i < h.pairs.size(); ++i) {
    auto [x, y] = h.pairs[i];
    if (x < 0 || y < 0 || static_cast<std::size_t>(x) >= a.size() ||
        static_cast<std::size_t>(y) >= b.size())
      return false;
    if (a[x] != b[y]) return false;
    if (i > 0 && (x <= h.pairs[i - 1].first || y <= h.pairs[i - 1].second)) return false;
  }
  return true;
}

namespace detail {

class MaximalMatchSearch {
 public:
  MaximalMatchSearch(std::span<const std::string> a, std::span<const std::string> b,
                     const TokenCost& cost, MatchLimits limits)
      : n_(a.size()), m_(b.size()), limits_(limits) {
    eq_.assign(n_ * m_, 0);
    w_.assign(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      w_[i] = cost(a[i]);
      for (std::size_t j = 0; j < m_; ++j) eq_[i * m_ + j] = a[i] == b[j];
    }
    // best[i][j]: max weight of a common subsequence of a[i..] and b[j..],
    // with the fewest pairs among those of max weight.
    best_w_.assign((n_ + 1) * (m_ + 1), 0.0);
    best_n_.assign((n_ + 1) * (m_ + 1), 0);
    for (std::size_t i = n_; i-- > 0;) {
      for (std::size_t j = m_; j-- > 0;) {
        double bw = bw_at(i + 1, j);
        std::size_t bn = bn_at(i + 1, j);
        consider(bw, bn, bw_at(i, j + 1), bn_at(i, j + 1));
        if (eq_[i * m_ + j]) consider(bw, bn, w_[i] + bw_at(i + 1, j + 1), bn_at(i + 1, j + 1) + 1);
        best_w_[i * (m_ + 1) + j] = bw;
        best_n_[i * (m_ + 1) + j] = bn;
      }
    }
  }

  std::vector<MatchHypothesis> run() {
    std::vector<MatchPair> path;
    dfs(-1, -1, 0.0, path);
    std::sort(found_.begin(), found_.end(), ranks_before);
    return std::move(found_);
  }

 private:
  double bw_at(std::size_t i, std::size_t j) const { return best_w_[i * (m_ + 1) + j]; }
  std::size_t bn_at(std::size_t i, std::size_t j) const { return best_n_[i * (m_ + 1) + j]; }

  static void consider(double& bw, std::size_t& bn, double w, std::size_t n) {
    if (w > bw + kCostEps || (std::abs(w - bw) <= kCostEps && n < bn)) {
      bw = w;
      bn = n;
    }
  }

  bool full() const { return found_.size() >= limits_.max_hypotheses; }

  const MatchHypothesis& worst() const { return found_.back(); }

  // Could any completion from (i, j) with `weight`/`count` so far still
  // enter the kept set? Completions found later are lexicographically larger.
  bool promising(int i, int j, double weight, std::size_t count) const {
    if (!full()) return true;
    const double bound = weight + bw_at(i + 1, j + 1);
    const auto& w = worst();
    if (bound < w.cost - kCostEps) return false;
    if (bound <= w.cost + kCostEps) return count + bn_at(i + 1, j + 1) < w.pairs.size();
    return true;
  }

  void offer(MatchHypothesis h) {
    auto pos = std::upper_bound(found_.begin(), found_.end(), h, ranks_before);
    if (full() && pos == found_.end()) return;
    found_.insert(pos, std::move(h));
    if (found_.size() > limits_.max_hypotheses) found_.pop_back();
  }

  void dfs(int i, int j, double weight, std::vector<MatchPair>& path) {
    // Candidate next pairs: matching cells below/right of (i, j) with no
    // matching cell strictly between.
    bool extended = false;
    std::size_t min_y = m_;
    for (std::size_t x = static_cast<std::size_t>(i + 1); x < n_; ++x) {
      std::size_t row_min = m_;
      for (std::size_t y = static_cast<std::size_t>(j + 1); y < m_ && y <= min_y; ++y) {
        if (!eq_[x * m_ + y]) continue;
        row_min = std::min(row_min, y);
        extended = true;
        const double nw = weight + w_[x];
        path.emplace_back(static_cast<int>(x), static_cast<int>(y));
        if (promising(static_cast<int>(x), static_cast<int>(y), nw, path.size()))
          dfs(static_cast<int>(x), static_cast<int>(y), nw, path);
        path.pop_back();
      }
      min_y = std::min(min_y, row_min);
    }
    if (!extended && !path.empty() && path.size() >= limits_.min_hits)
      offer(MatchHypothesis{path, weight});
  }

  std::size_t n_, m_;
  MatchLimits limits_;
  std::vector<char> eq_;
  std::vector<double> w_;
  std::vector<double> best_w_;
  std::vector<std::size_t> best_n_;
  std::vector<MatchHypothesis> found_;
};

}  // namespace detail

/// Ranked maximal order-preserving matchings between `a` and `b`.
///
/// Every returned hypothesis is maximal: no further equal-token pair can be
/// inserted without breaking monotonicity. Results are ranked by summed
/// cost of the matched symbols (descending), then fewer pairs, then the
/// lexicographically smallest pair list, and truncated to
/// `limits.max_hypotheses`.
inline std::vector<MatchHypothesis> find_matches(std::span<const std::string> a,
                                                 std::span<const std::string> b,
                                                 MatchLimits limits = {},
                                                 const TokenCost& cost = unit_cost) {
  if (a.empty() || b.empty()) throw Error("find_matches: empty sequence");
  if (limits.max_hypotheses < 1) throw Error("find_matches: max_hypotheses must be >= 1");
  return detail::MaximalMatchSearch(a, b, cost, limits).run();
}

inline constexpr std::size_t kExhaustiveMatchGuard = 64;

/// Every maximal monotone matching, by brute force over all increasing
/// chains. Test oracle for find_matches; |a| * |b| must not exceed 64.
inline std::vector<MatchHypothesis> exhaustive_matches(std::span<const std::string> a,
                                                       std::span<const std::string> b,
                                                       const TokenCost& cost = unit_cost) {
  if (a.empty() || b.empty()) throw Error("exhaustive_matches: empty sequence");
  if (a.size() * b.size() > kExhaustiveMatchGuard)
    throw GuardError("exhaustive_matches: |a| x |b| exceeds 64");

  std::vector<MatchPair> cells;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      if (a[i] == b[j]) cells.emplace_back(static_cast<int>(i), static_cast<int>(j));

  std::vector<std::vector<MatchPair>> chains;
  std::vector<MatchPair> cur;
  std::function<void(std::size_t)> grow = [&](std::size_t from) {
    if (!cur.empty()) chains.push_back(cur);
    for (std::size_t k = from; k < cells.size(); ++k) {
      if (!cur.empty() && (cells[k].first <= cur.back().first || cells[k].second <= cur.back().second))
        continue;
      cur.push_back(cells[k]);
      grow(k + 1);
      cur.pop_back();
    }
  };
  grow(0);

  auto insertable = [&](const std::vector<MatchPair>& chain, MatchPair c) {
    if (std::find(chain.begin(), chain.end(), c) != chain.end()) return false;
    for (const auto& p : chain)
      if ((p.first == c.first) || (p.second == c.second)) return false;
    for (const auto& p : chain)
      if ((p.first < c.first) != (p.second < c.second)) return false;
    return true;
  };

  std::vector<MatchHypothesis> out;
  for (auto& chain : chains) {
    bool maximal = std::none_of(cells.begin(), cells.end(),
                                [&](const MatchPair& c) { return insertable(chain, c); });
    if (!maximal) continue;
    MatchHypothesis h;
    h.pairs = chain;
    for (const auto& p : chain) h.cost += cost(a[p.first]);
    out.push_back(std::move(h));
  }
  std::sort(out.begin(), out.end(), ranks_before);
  return out;
}

}  // namespace sp
