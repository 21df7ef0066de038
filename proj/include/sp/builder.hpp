#pragma once

// Staged heuristic construction of multiple alignments: partial alignments
// are projected to a sequence, matched against Old patterns, merged, and
// the best are kept for the next stage.

#include <algorithm>
#include <bit>
#include <functional>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sp/core.hpp"
#include "sp/matcher.hpp"
#include "sp/score.hpp"

namespace sp {

struct SearchParams {
  std::size_t beam_width = 200;
  std::size_t max_stages = 20;
  std::size_t top_k = 10;
  std::size_t min_hits = 1;
  std::size_t match_hypotheses = 200;  // per (beam member, pattern) pair

  void check() const {
    if (beam_width < 1 || max_stages < 1 || top_k < 1 || min_hits < 1 || match_hypotheses < 1)
      throw Error("search parameters must all be >= 1");
  }
};

struct ScoredAlignment {
  Alignment alignment;
  EncodedResult result;
};

namespace detail {

inline std::vector<std::string> project_unchecked(const Alignment& a) {
  std::vector<std::string> seq;
  seq.reserve(a.columns.size());
  for (std::size_t c = 0; c < a.columns.size(); ++c) seq.push_back(a.token(c));
  return seq;
}

inline Alignment merge_unchecked(const Alignment& a, std::shared_ptr<const SPPattern> p,
                                 const MatchHypothesis& m) {
  const std::size_t new_row = a.rows.size();
  const std::size_t width = new_row + 1;
  std::vector<int> matched_at(a.columns.size(), kNoSymbol);
  for (auto [c, q] : m.pairs) matched_at[static_cast<std::size_t>(c)] = q;

  Alignment out;
  out.rows = a.rows;
  out.rows.push_back(p);
  out.columns.reserve(a.columns.size() + p->size() - m.pairs.size());

  auto fresh = [&](int q) {
    Column col(width, kNoSymbol);
    col[new_row] = q;
    out.columns.push_back(std::move(col));
  };

  // Leading unmatched symbols sit just before the first matched column;
  // every other unmatched run follows the matched symbol before it.
  const auto first_col = static_cast<std::size_t>(m.pairs.front().first);
  std::size_t next_pair = 0;
  for (std::size_t c = 0; c < a.columns.size(); ++c) {
    if (c == first_col)
      for (int q = 0; q < m.pairs.front().second; ++q) fresh(q);
    Column col = a.columns[c];
    col.push_back(matched_at[c]);
    out.columns.push_back(std::move(col));
    if (matched_at[c] != kNoSymbol) {
      ++next_pair;
      const int stop = next_pair < m.pairs.size() ? m.pairs[next_pair].second
                                                   : static_cast<int>(p->size());
      for (int q = matched_at[c] + 1; q < stop; ++q) fresh(q);
    }
  }
  return out;
}

// Change in score caused by merging `p` via `m`, from per-column summaries
// of the member alignment. Mirrors encode().
//
// Besides cd the search tracks a "potential": cd plus the coded
// identification symbols that some contents symbol of the grammar (or a New
// symbol) could still reference, i.e. debts a later row may pay back.
struct ColumnSummary {
  ColumnRoles roles;
  double cost = 0;                  // cost of the column's token
  double coded_identification = 0;  // cost of identification symbols now in the code
  double coded_fixed = 0;           // the part no later row can reference
  double new_cost = 0;              // cost of the New symbol, if any
  bool fixed = false;               // the token is never a referrer anywhere

  double coded_after(bool adds_identification) const {
    auto r = roles;
    ++(adds_identification ? r.identification : r.contents);
    return static_cast<double>(r.coded_identification()) * cost;
  }
};

using TokenSet = std::unordered_set<std::string>;

inline std::vector<ColumnSummary> summarize(const Alignment& a, const CostModel& cm,
                                            const TokenSet& referable) {
  std::vector<ColumnSummary> out(a.columns.size());
  for (std::size_t c = 0; c < a.columns.size(); ++c) {
    auto& s = out[c];
    s.roles = column_roles(a, c);
    const auto& tok = a.token(c);
    s.cost = cm.cost(tok);
    s.fixed = !referable.count(tok);
    if (s.roles.has_new) s.new_cost = s.cost;
    s.coded_identification = static_cast<double>(s.roles.coded_identification()) * s.cost;
    if (s.fixed) s.coded_fixed = s.coded_identification;
  }
  return out;
}

struct MergeDelta {
  double cd = 0;
  double potential = 0;
};

inline MergeDelta merge_delta(const std::vector<ColumnSummary>& cols, const SPPattern& p,
                              const std::vector<double>& p_costs, const std::vector<char>& p_fixed,
                              const MatchHypothesis& m) {
  double gained = 0, coded = 0, fixed = 0;
  std::vector<char> matched(p.size(), 0);
  for (auto [c, q] : m.pairs) {
    const auto& s = cols[static_cast<std::size_t>(c)];
    const auto pos = static_cast<std::size_t>(q);
    matched[pos] = 1;
    if (s.roles.has_new && s.roles.occupancy == 1) gained += s.new_cost;
    const double change = s.coded_after(p.is_identification(pos)) - s.coded_identification;
    coded += change;
    if (s.fixed) fixed += change;
  }
  for (std::size_t q = 0; q < p.id_prefix_len; ++q) {
    if (matched[q]) continue;
    coded += p_costs[q];
    if (p_fixed[q]) fixed += p_costs[q];
  }
  return {gained - coded, gained - fixed};
}

// Contribution of one pair to merge_delta, relative to leaving the symbol
// of `p` unmatched.
inline double pair_gain(const ColumnSummary& s, const SPPattern& p, const std::vector<double>& p_costs,
                        std::size_t pos) {
  double g = 0;
  if (s.roles.has_new && s.roles.occupancy == 1) g += s.new_cost;
  g -= s.coded_after(p.is_identification(pos)) - s.coded_identification;
  if (p.is_identification(pos)) g += p_costs[pos];
  return g;
}

// Maximal hypotheses plus those obtained by dropping one pair that gains
// something. Leaving such a symbol unmatched now can let later rows share
// its column, which no maximal hypothesis allows.
inline std::vector<MatchHypothesis> with_drop_one_variants(std::vector<MatchHypothesis> hyps,
                                                           const std::vector<ColumnSummary>& cols,
                                                           const SPPattern& p,
                                                           const std::vector<double>& p_costs,
                                                           const TokenCost& cost,
                                                           std::span<const std::string> proj) {
  std::set<std::vector<MatchPair>> known;
  for (const auto& h : hyps) known.insert(h.pairs);
  const std::size_t maximal = hyps.size();
  for (std::size_t i = 0; i < maximal; ++i) {
    if (hyps[i].pairs.size() < 2) continue;
    for (std::size_t k = 0; k < hyps[i].pairs.size(); ++k) {
      const auto [c, q] = hyps[i].pairs[k];
      if (pair_gain(cols[static_cast<std::size_t>(c)], p, p_costs, static_cast<std::size_t>(q)) <=
          kCostEps)
        continue;
      MatchHypothesis v;
      v.pairs = hyps[i].pairs;
      v.pairs.erase(v.pairs.begin() + static_cast<std::ptrdiff_t>(k));
      if (!known.insert(v.pairs).second) continue;
      for (auto [x, y] : v.pairs) v.cost += cost(proj[static_cast<std::size_t>(x)]);
      hyps.push_back(std::move(v));
    }
  }
  return hyps;
}

inline double cd_of(const std::vector<ColumnSummary>& cols) {
  double v = 0;
  for (const auto& s : cols) v += (s.roles.new_matched() ? s.new_cost : 0) - s.coded_identification;
  return v;
}

inline double potential_of(const std::vector<ColumnSummary>& cols) {
  double v = 0;
  for (const auto& s : cols) v += (s.roles.new_matched() ? s.new_cost : 0) - s.coded_fixed;
  return v;
}

inline Alignment remove_row(const Alignment& a, std::size_t r) {
  Alignment out;
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    if (i != r) out.rows.push_back(a.rows[i]);
  for (const auto& col : a.columns) {
    if (col[r] != kNoSymbol && std::count(col.begin(), col.end(), kNoSymbol) + 1 ==
                                   static_cast<std::ptrdiff_t>(col.size()))
      continue;
    Column c = col;
    c.erase(c.begin() + static_cast<std::ptrdiff_t>(r));
    out.columns.push_back(std::move(c));
  }
  return out;
}

// Local improvement: take each Old row out in turn and merge it back with
// the best hypothesis against the rest, while that raises cd.
inline Alignment polish(Alignment a, const CostModel& cm, const TokenSet& referable,
                        const MatchLimits& limits, const TokenCost& token_cost) {
  double cd = cd_of(summarize(a, cm, referable));
  for (std::size_t round = 0; round < 4 * a.rows.size(); ++round) {
    bool improved = false;
    for (std::size_t r = 1; r < a.rows.size() && !improved; ++r) {
      const auto rest = remove_row(a, r);
      const auto cols = summarize(rest, cm, referable);
      const double base = cd_of(cols);
      const auto& p = a.rows[r];
      std::vector<double> costs;
      std::vector<char> fixed;
      for (std::size_t i = 0; i < p->size(); ++i) {
        costs.push_back(cm.cost(p->symbols[i]));
        fixed.push_back(i < p->id_prefix_len && !referable.count(p->symbols[i]));
      }
      const auto proj = project_unchecked(rest);
      const auto hyps = with_drop_one_variants(find_matches(proj, p->symbols, limits, token_cost),
                                               cols, *p, costs, token_cost, proj);
      std::size_t best = hyps.size();
      double best_cd = cd;
      for (std::size_t h = 0; h < hyps.size(); ++h) {
        const double v = base + merge_delta(cols, *p, costs, fixed, hyps[h]).cd;
        if (v > best_cd + kCostEps) {
          best_cd = v;
          best = h;
        }
      }
      if (best == hyps.size()) continue;
      a = merge_unchecked(rest, p, hyps[best]);
      cd = best_cd;
      improved = true;
    }
    if (!improved) break;
  }
  return a;
}

/// Identity of an alignment up to the placement of unmatched symbols.
inline std::string alignment_key(const Alignment& a) {
  std::vector<std::string> ids = a.row_ids();
  std::sort(ids.begin(), ids.end());
  std::vector<std::string> shared;
  for (std::size_t c = 0; c < a.columns.size(); ++c) {
    std::vector<std::string> cell;
    for (std::size_t r = 0; r < a.rows.size(); ++r)
      if (a.columns[c][r] != kNoSymbol)
        cell.push_back(a.rows[r]->pattern_id + "@" + std::to_string(a.columns[c][r]));
    if (cell.size() < 2) continue;
    std::sort(cell.begin(), cell.end());
    std::string s;
    for (auto& x : cell) s += x + ",";
    shared.push_back(std::move(s));
  }
  std::sort(shared.begin(), shared.end());
  std::string key;
  for (auto& s : ids) key += s + "|";
  key += "#";
  for (auto& s : shared) key += s + ";";
  return key;
}

}  // namespace detail

/// Ranking of scored alignments: cd descending, then fewer rows, then the
/// lexicographically smaller list of row pattern ids.
inline bool alignment_ranks_before(const ScoredAlignment& x, const ScoredAlignment& y) {
  if (std::abs(x.result.cd - y.result.cd) > kCostEps) return x.result.cd > y.result.cd;
  if (x.alignment.row_count() != y.alignment.row_count())
    return x.alignment.row_count() < y.alignment.row_count();
  return x.alignment.row_ids() < y.alignment.row_ids();
}

/// One symbol per column, in column order.
inline std::vector<std::string> project(const Alignment& a) {
  require_legal(a);
  return detail::project_unchecked(a);
}

/// Appends `p` as a new row, joining the matched symbols to the columns
/// named by `m` (pairs are (column, position in p)).
inline Alignment merge(const Alignment& a, const SPPattern& p, const MatchHypothesis& m) {
  if (p.role != Role::Old) throw Error("merge: only Old patterns can be merged");
  const auto proj = project(a);
  if (!is_valid_hypothesis(m, proj, p.symbols))
    throw Error("merge: hypothesis does not match the projection and pattern");
  auto out = detail::merge_unchecked(a, std::make_shared<const SPPattern>(p), m);
  require_legal(out);
  return out;
}

/// Alignments of `new_p` against `g`, best first. Only alignments with
/// cd > 0 are returned; probabilities are normalized over the returned set.
inline std::vector<ScoredAlignment> build_alignments(const SPPattern& new_p, const Grammar& g,
                                                     const SearchParams& params,
                                                     const CostModel& cm) {
  params.check();
  check_pattern(new_p);
  if (new_p.role != Role::New) throw Error("build_alignments: row 0 must be a New pattern");

  std::vector<std::shared_ptr<const SPPattern>> olds;
  std::vector<std::vector<double>> old_costs;
  for (const auto& p : g.patterns) {
    auto sp = std::make_shared<SPPattern>(p);
    sp->role = Role::Old;
    std::vector<double> costs;
    for (const auto& s : p.symbols) costs.push_back(cm.cost(s));
    olds.push_back(std::move(sp));
    old_costs.push_back(std::move(costs));
  }
  for (const auto& s : new_p.symbols) cm.cost(s);

  detail::TokenSet referable(new_p.symbols.begin(), new_p.symbols.end());
  for (const auto& p : olds)
    for (std::size_t i = p->id_prefix_len; i < p->size(); ++i) referable.insert(p->symbols[i]);
  std::vector<std::vector<char>> old_fixed;
  for (const auto& p : olds) {
    std::vector<char> fixed(p->size(), 0);
    for (std::size_t i = 0; i < p->id_prefix_len; ++i) fixed[i] = !referable.count(p->symbols[i]);
    old_fixed.push_back(std::move(fixed));
  }

  const TokenCost token_cost = [&cm](const std::string& t) { return cm.cost(t); };
  const MatchLimits limits{params.match_hypotheses, params.min_hits};

  struct Member {
    Alignment alignment;
    double cd = 0;
    double potential = 0;
  };
  std::vector<Member> beam{{degenerate_alignment(new_p), 0.0, 0.0}};
  std::unordered_set<std::string> seen{detail::alignment_key(beam.front().alignment)};
  std::vector<ScoredAlignment> pool;

  for (std::size_t stage = 0; stage < params.max_stages && !olds.empty(); ++stage) {
    struct Candidate {
      double cd, potential;
      std::size_t member, pattern, hyp;
      std::size_t width = 0;  // columns after the merge
      std::size_t sibling_rank = 0;  // position among the candidates of the same member
      std::string signature;  // row ids and matched New positions after the merge
    };
    std::vector<Candidate> cands;
    std::vector<std::vector<std::vector<MatchHypothesis>>> hyps(beam.size());

    for (std::size_t b = 0; b < beam.size(); ++b) {
      const auto proj = detail::project_unchecked(beam[b].alignment);
      const auto summary = detail::summarize(beam[b].alignment, cm, referable);
      const auto& cols_b = beam[b].alignment.columns;
      std::string matched_new(new_p.size(), '0');
      for (std::size_t c = 0; c < cols_b.size(); ++c)
        if (summary[c].roles.new_matched()) matched_new[static_cast<std::size_t>(cols_b[c][0])] = '1';
      const auto ids_b = beam[b].alignment.row_ids();
      hyps[b].resize(olds.size());
      const std::size_t first = cands.size();
      for (std::size_t pi = 0; pi < olds.size(); ++pi) {
        hyps[b][pi] = detail::with_drop_one_variants(
            find_matches(proj, olds[pi]->symbols, limits, token_cost), summary, *olds[pi],
            old_costs[pi], token_cost, proj);
        for (std::size_t h = 0; h < hyps[b][pi].size(); ++h) {
          const auto d = detail::merge_delta(summary, *olds[pi], old_costs[pi], old_fixed[pi],
                                             hyps[b][pi][h]);
          const std::size_t width = beam[b].alignment.columns.size() + olds[pi]->size() -
                                    hyps[b][pi][h].pairs.size();
          auto ids = ids_b;
          ids.push_back(olds[pi]->pattern_id);
          std::sort(ids.begin() + 1, ids.end());
          auto mask = matched_new;
          for (auto [c, q] : hyps[b][pi][h].pairs)
            if (summary[static_cast<std::size_t>(c)].roles.has_new)
              mask[static_cast<std::size_t>(cols_b[static_cast<std::size_t>(c)][0])] = '1';
          std::string sig = mask;
          for (const auto& id : ids) sig += '\x1f' + id;
          cands.push_back({beam[b].cd + d.cd, beam[b].potential + d.potential, b, pi, h, width, 0,
                           std::move(sig)});
        }
      }
      std::stable_sort(cands.begin() + static_cast<std::ptrdiff_t>(first), cands.end(),
                       [&](const Candidate& x, const Candidate& y) {
                         if (std::abs(x.cd - y.cd) > kCostEps) return x.cd > y.cd;
                         return olds[x.pattern]->pattern_id < olds[y.pattern]->pattern_id;
                       });
      for (std::size_t i = first; i < cands.size(); ++i) cands[i].sibling_rank = i - first;
    }

    // Two rankings, by cd and by potential, feed the beam alternately. Ties
    // go to the more compact alignment (more symbols sharing columns), then
    // are interleaved across parents so that one member's children cannot
    // crowd out the rest.
    auto by = [&](auto score) {
      std::vector<std::size_t> order(cands.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        const auto& x = cands[i];
        const auto& y = cands[j];
        if (std::abs(score(x) - score(y)) > kCostEps) return score(x) > score(y);
        if (std::abs(x.cd - y.cd) > kCostEps) return x.cd > y.cd;
        if (x.width != y.width) return x.width < y.width;
        if (x.sibling_rank != y.sibling_rank) return x.sibling_rank < y.sibling_rank;
        return x.member < y.member;
      });
      return order;
    };
    const auto by_cd = by([](const Candidate& c) { return c.cd; });
    const auto by_potential = by([](const Candidate& c) { return c.potential; });

    // Near-duplicates (same rows, same New symbols matched) must not fill the
    // beam: the first pass admits one candidate per signature, the second
    // two, and the last fills what is left in plain ranking order.
    std::vector<Member> next;
    std::vector<char> taken(cands.size(), 0);
    std::unordered_map<std::string, std::size_t> per_signature;
    const std::vector<std::size_t>* lists[2] = {&by_cd, &by_potential};
    constexpr std::size_t kQuota[] = {1, 2, std::size_t(-1)};
    for (const std::size_t quota : kQuota)
    for (std::size_t turn = 0, cursor[2] = {0, 0}; next.size() < params.beam_width; turn ^= 1) {
      auto& i = cursor[turn];
      const auto& list = *lists[turn];
      auto skip = [&](std::size_t k) {
        if (taken[k]) return true;
        const auto it = per_signature.find(cands[k].signature);
        return it != per_signature.end() && it->second >= quota;
      };
      while (i < list.size() && skip(list[i])) ++i;
      if (i >= list.size()) {
        if (cursor[turn ^ 1] >= lists[turn ^ 1]->size()) break;
        continue;
      }
      const auto& c = cands[list[i]];
      taken[list[i]] = 1;
      ++per_signature[c.signature];
      auto merged = detail::merge_unchecked(beam[c.member].alignment, olds[c.pattern],
                                            hyps[c.member][c.pattern][c.hyp]);
      if (!seen.insert(detail::alignment_key(merged)).second) continue;
      // The polished form joins the beam beside the raw merge rather than
      // replacing it: polishing tends to send many members to the same local
      // optimum, and the raw ones keep the beam diverse.
      auto polished = detail::polish(merged, cm, referable, limits, token_cost);
      const bool keep_polished = seen.insert(detail::alignment_key(polished)).second;
      for (auto* m : {&merged, keep_polished ? &polished : nullptr}) {
        if (!m || next.size() >= params.beam_width) continue;
        auto res = encode(*m, cm);
        if (res.cd > kCostEps) pool.push_back({*m, res});
        const double potential = detail::potential_of(detail::summarize(*m, cm, referable));
        next.push_back({std::move(*m), res.cd, potential});
      }
    }
    if (next.empty()) break;
    beam = std::move(next);
  }

  std::stable_sort(pool.begin(), pool.end(), alignment_ranks_before);
  if (pool.size() > params.top_k) pool.resize(params.top_k);
  std::vector<EncodedResult> results;
  for (const auto& s : pool) results.push_back(s.result);
  relative_probabilities(results);
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i].result = results[i];
  return pool;
}

inline std::vector<ScoredAlignment> build_alignments(const SPPattern& new_p, const Grammar& g,
                                                     const SearchParams& params = {}) {
  const SPPattern extra[] = {new_p};
  return build_alignments(new_p, g, params, g.cost_model(extra));
}

// ---------------------------------------------------------------------------
// Exhaustive oracle

struct ExhaustiveLimits {
  static constexpr std::size_t max_new = 8;
  static constexpr std::size_t max_patterns = 4;
  static constexpr std::size_t max_pattern_len = 6;
  static constexpr std::size_t max_rows = 5;
};

struct ExhaustiveResult {
  Alignment alignment;
  double cd = 0;
};

namespace detail {

// Best column arrangement for a fixed list of rows, by dynamic programming
// over the vector of next positions. Column scores are computed here from
// first principles rather than through encode().
class FixedRowsOptimizer {
 public:
  FixedRowsOptimizer(std::vector<const SPPattern*> rows, const CostModel& cm)
      : rows_(std::move(rows)), cm_(cm) {
    stride_.resize(rows_.size());
    std::size_t total = 1;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      stride_[r] = total;
      total *= rows_[r]->size() + 1;
    }
    value_.assign(total, 0.0);
    choice_.assign(total, 0);
    done_.assign(total, 0);
  }

  double solve() { return best(std::vector<std::size_t>(rows_.size(), 0)); }

  std::vector<Column> columns() {
    std::vector<Column> out;
    std::vector<std::size_t> pos(rows_.size(), 0);
    while (true) {
      best(pos);
      const unsigned mask = choice_[index(pos)];
      if (mask == 0) break;
      Column col(rows_.size(), kNoSymbol);
      for (std::size_t r = 0; r < rows_.size(); ++r)
        if (mask & (1u << r)) col[r] = static_cast<int>(pos[r]++);
      out.push_back(std::move(col));
    }
    return out;
  }

 private:
  std::size_t index(const std::vector<std::size_t>& pos) const {
    std::size_t idx = 0;
    for (std::size_t r = 0; r < pos.size(); ++r) idx += pos[r] * stride_[r];
    return idx;
  }

  double column_value(const std::vector<std::size_t>& pos, unsigned mask) const {
    std::size_t count = 0, referrers = 0, ids = 0;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (!(mask & (1u << r))) continue;
      ++count;
      if (r == 0 || pos[r] >= rows_[r]->id_prefix_len)
        ++referrers;
      else
        ++ids;
    }
    const auto first = static_cast<std::size_t>(std::countr_zero(mask));
    const double cost = cm_.cost(rows_[first]->symbols[pos[first]]);
    double v = 0;
    if ((mask & 1u) && count >= 2) v += cost;
    if (ids > referrers) v -= static_cast<double>(ids - referrers) * cost;
    return v;
  }

  double best(std::vector<std::size_t> pos) {
    const std::size_t idx = index(pos);
    if (done_[idx]) return value_[idx];
    double best_v = 0;
    unsigned best_mask = 0;
    bool any = false;
    // Group unfinished rows by current token; a column is any nonempty
    // subset of one group.
    std::vector<unsigned> groups;
    unsigned placed = 0;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (pos[r] >= rows_[r]->size() || (placed & (1u << r))) continue;
      unsigned group = 0;
      for (std::size_t s = r; s < rows_.size(); ++s)
        if (pos[s] < rows_[s]->size() && rows_[s]->symbols[pos[s]] == rows_[r]->symbols[pos[r]])
          group |= 1u << s;
      placed |= group;
      groups.push_back(group);
    }
    for (const unsigned group : groups) {
      for (unsigned sub = group; sub; sub = (sub - 1) & group) {
        auto next = pos;
        for (std::size_t r = 0; r < rows_.size(); ++r)
          if (sub & (1u << r)) ++next[r];
        const double v = column_value(pos, sub) + best(next);
        if (!any || v > best_v + kCostEps) {
          best_v = v;
          best_mask = sub;
          any = true;
        }
      }
    }
    value_[idx] = best_v;
    choice_[idx] = best_mask;
    done_[idx] = 1;
    return best_v;
  }

  std::vector<const SPPattern*> rows_;
  const CostModel& cm_;
  std::vector<std::size_t> stride_;
  std::vector<double> value_;
  std::vector<unsigned> choice_;
  std::vector<char> done_;
};

}  // namespace detail

/// Globally cd-optimal alignment by enumerating every multiset of up to
/// four Old rows and solving each exactly. nullopt when no alignment has
/// cd > 0. Test oracle for build_alignments.
inline std::optional<ExhaustiveResult> exhaustive_build(const SPPattern& new_p, const Grammar& g,
                                                        const CostModel& cm) {
  using L = ExhaustiveLimits;
  if (new_p.size() > L::max_new) throw GuardError("exhaustive_build: New pattern too long");
  if (g.size() > L::max_patterns) throw GuardError("exhaustive_build: too many patterns");
  for (const auto& p : g.patterns)
    if (p.size() > L::max_pattern_len) throw GuardError("exhaustive_build: pattern too long");

  std::vector<std::size_t> order(g.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return g.patterns[x].pattern_id < g.patterns[y].pattern_id;
  });

  std::optional<ExhaustiveResult> best;
  std::vector<std::string> best_ids;
  std::vector<std::size_t> chosen;

  auto consider = [&]() {
    std::vector<const SPPattern*> rows{&new_p};
    for (auto i : chosen) rows.push_back(&g.patterns[order[i]]);
    detail::FixedRowsOptimizer opt(rows, cm);
    const double v = opt.solve();
    if (v <= kCostEps) return;
    std::vector<std::string> ids;
    for (auto* r : rows) ids.push_back(r->pattern_id);
    bool better = !best || v > best->cd + kCostEps;
    if (!better && std::abs(v - best->cd) <= kCostEps)
      better = rows.size() < best->alignment.row_count() ||
               (rows.size() == best->alignment.row_count() && ids < best_ids);
    if (!better) return;
    ExhaustiveResult res;
    for (auto* r : rows) {
      auto copy = std::make_shared<SPPattern>(*r);
      if (r != &new_p) copy->role = Role::Old;
      res.alignment.rows.push_back(std::move(copy));
    }
    res.alignment.columns = opt.columns();
    res.cd = v;
    best = std::move(res);
    best_ids = std::move(ids);
  };

  std::function<void(std::size_t)> enumerate = [&](std::size_t from) {
    consider();
    if (chosen.size() + 1 >= L::max_rows) return;
    for (std::size_t i = from; i < order.size(); ++i) {
      chosen.push_back(i);
      enumerate(i);
      chosen.pop_back();
    }
  };
  enumerate(0);
  return best;
}

inline std::optional<ExhaustiveResult> exhaustive_build(const SPPattern& new_p, const Grammar& g) {
  const SPPattern extra[] = {new_p};
  return exhaustive_build(new_p, g, g.cost_model(extra));
}

// ---------------------------------------------------------------------------
// Multiple sequence alignment

/// U = sum over columns of (symbols in column - 1) * cost(token).
inline double unification_saving(const Alignment& a, const CostModel& cm) {
  double u = 0;
  for (std::size_t c = 0; c < a.columns.size(); ++c) {
    const auto n = a.occupancy(c);
    if (n >= 2) u += static_cast<double>(n - 1) * cm.cost(a.token(c));
  }
  return u;
}

struct MsaResult {
  Alignment alignment;
  double saving = 0;
};

/// Aligns every sequence (the first as row 0) by the same staged search,
/// scoring partial alignments by unification saving.
inline MsaResult msa_build(const std::vector<std::vector<std::string>>& seqs,
                           const SearchParams& params = {},
                           CostModelKind kind = CostModelKind::Uniform) {
  params.check();
  if (seqs.size() < 2) throw Error("msa_build: need at least two sequences");
  std::vector<std::shared_ptr<const SPPattern>> rows;
  std::vector<SPPattern> all;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (seqs[i].empty()) throw Error("msa_build: empty sequence");
    auto p = i == 0 ? make_new_pattern(seqs[i], "s0")
                    : make_old_pattern("s" + std::to_string(i), seqs[i], 0);
    all.push_back(p);
    rows.push_back(std::make_shared<const SPPattern>(std::move(p)));
  }
  const CostModel cm = build_cost_model(kind, all);
  const TokenCost token_cost = [&cm](const std::string& t) { return cm.cost(t); };
  const MatchLimits limits{params.match_hypotheses, 1};

  struct Member {
    Alignment alignment;
    std::vector<char> used;
    double saving = 0;
  };
  Member start{degenerate_alignment(*rows[0]), std::vector<char>(seqs.size(), 0), 0.0};
  start.used[0] = 1;
  std::vector<Member> beam{start};

  for (std::size_t stage = 1; stage < seqs.size(); ++stage) {
    struct Candidate {
      double saving;
      std::size_t member, seq, hyp;
    };
    std::vector<Candidate> cands;
    std::vector<std::vector<std::vector<MatchHypothesis>>> hyps(beam.size());
    for (std::size_t b = 0; b < beam.size(); ++b) {
      const auto proj = detail::project_unchecked(beam[b].alignment);
      hyps[b].resize(seqs.size());
      for (std::size_t s = 0; s < seqs.size(); ++s) {
        if (beam[b].used[s]) continue;
        hyps[b][s] = find_matches(proj, rows[s]->symbols, limits, token_cost);
        for (std::size_t h = 0; h < hyps[b][s].size(); ++h)
          cands.push_back({beam[b].saving + hyps[b][s][h].cost, b, s, h});
      }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
      return x.saving > y.saving + kCostEps;
    });

    std::vector<Member> next;
    std::unordered_set<std::string> seen;
    for (const auto& c : cands) {
      if (next.size() >= params.beam_width) break;
      Member m;
      m.alignment = detail::merge_unchecked(beam[c.member].alignment, rows[c.seq],
                                            hyps[c.member][c.seq][c.hyp]);
      if (!seen.insert(detail::alignment_key(m.alignment)).second) continue;
      m.used = beam[c.member].used;
      m.used[c.seq] = 1;
      m.saving = c.saving;
      next.push_back(std::move(m));
    }
    if (next.empty()) {
      // No sequence shares a token with the projection: append the rest unmatched.
      for (auto& m : beam) {
        for (std::size_t s = 0; s < seqs.size(); ++s) {
          if (m.used[s]) continue;
          Alignment out = m.alignment;
          out.rows.push_back(rows[s]);
          for (auto& col : out.columns) col.push_back(kNoSymbol);
          for (std::size_t q = 0; q < rows[s]->size(); ++q) {
            Column col(out.rows.size(), kNoSymbol);
            col.back() = static_cast<int>(q);
            out.columns.push_back(std::move(col));
          }
          m.alignment = std::move(out);
          m.used[s] = 1;
          break;
        }
      }
      continue;
    }
    beam = std::move(next);
  }

  MsaResult res{beam.front().alignment, 0.0};
  res.saving = unification_saving(res.alignment, cm);
  return res;
}

}  // namespace sp
