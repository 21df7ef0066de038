#pragma once

// Unsupervised grammar learning: candidate patterns are derived from
// pairwise alignments and grammars are searched for the smallest total
// description length T = G + E.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sp/builder.hpp"
#include "sp/core.hpp"
#include "sp/score.hpp"

namespace sp {

/// Deterministic source of fresh class tokens `%<n>` / `#%<n>`.
class FreshIds {
 public:
  explicit FreshIds(long seed = 1) : next_(seed) {}
  std::string next_class() { return "%" + std::to_string(next_++); }
  long peek() const noexcept { return next_; }

 private:
  long next_;
};

inline std::string terminator_of(const std::string& class_token) { return "#" + class_token; }

struct CandidatePool {
  std::vector<SPPattern> patterns;
};

/// Adds one occurrence of `p`: an entry with the same content gains 1 in
/// frequency, otherwise `p` is inserted with frequency 1.
inline CandidatePool unify_into_pool(CandidatePool pool, const SPPattern& p) {
  for (auto& q : pool.patterns) {
    if (q.same_content(p)) {
      ++q.frequency;
      return pool;
    }
  }
  SPPattern entry = p;
  entry.frequency = 1;
  pool.patterns.push_back(std::move(entry));
  return pool;
}

namespace detail {

// Positions of a row that carry its material: all of a New row; for an Old
// row, the contents minus a trailing terminator `#<class>`.
inline std::vector<char> body_mask(const SPPattern& p) {
  std::vector<char> body(p.size(), 1);
  if (p.id_prefix_len == 0) return body;
  for (std::size_t i = 0; i < p.id_prefix_len; ++i) body[i] = 0;
  if (p.symbols.back() == terminator_of(p.symbols.front()) && p.size() > p.id_prefix_len + 1)
    body.back() = 0;
  return body;
}

inline SPPattern learned_pattern(std::string id, std::vector<std::string> symbols,
                                 std::size_t id_prefix_len) {
  SPPattern p;
  p.pattern_id = std::move(id);
  p.symbols = std::move(symbols);
  p.id_prefix_len = id_prefix_len;
  p.role = Role::Old;
  p.provenance = Provenance::Learned;
  return p;
}

}  // namespace detail

/// Segment and abstract patterns from a two-row alignment.
///
/// Runs of matched columns become `%k : ... #%k`. Each gap between matched
/// runs (including before the first and after the last) becomes a
/// disjunction class `%k d : ... #%k` with one member per row, d being the
/// row index; a row with nothing in the gap contributes an empty member.
/// The abstract pattern lists `%k #%k` for every slot in column order.
inline std::vector<SPPattern> derive_patterns(const Alignment& a, FreshIds& ids) {
  require_legal(a);
  if (a.row_count() != 2) throw Error("derive_patterns: alignment must have exactly two rows");

  const auto body0 = detail::body_mask(a.row(0));
  const auto body1 = detail::body_mask(a.row(1));

  struct Slot {
    bool matched = false;
    std::vector<std::string> side[2];
  };
  std::vector<Slot> slots;
  auto open_gap = [&]() -> Slot& {
    if (slots.empty() || slots.back().matched) slots.push_back(Slot{});
    return slots.back();
  };

  bool any_match = false;
  for (const auto& col : a.columns) {
    const bool in0 = col[0] != kNoSymbol && body0[static_cast<std::size_t>(col[0])];
    const bool in1 = col[1] != kNoSymbol && body1[static_cast<std::size_t>(col[1])];
    if (in0 && in1) {
      if (slots.empty() || !slots.back().matched) slots.push_back(Slot{true, {}});
      slots.back().side[0].push_back(a.row(0).symbols[static_cast<std::size_t>(col[0])]);
      any_match = true;
      continue;
    }
    if (in0) open_gap().side[0].push_back(a.row(0).symbols[static_cast<std::size_t>(col[0])]);
    if (in1) open_gap().side[1].push_back(a.row(1).symbols[static_cast<std::size_t>(col[1])]);
  }
  if (!any_match) return {};

  std::vector<SPPattern> out;
  std::vector<std::string> abstract_refs;
  for (const auto& slot : slots) {
    const std::string cls = ids.next_class();
    const std::string end = terminator_of(cls);
    abstract_refs.push_back(cls);
    abstract_refs.push_back(end);
    if (slot.matched) {
      std::vector<std::string> syms{cls};
      syms.insert(syms.end(), slot.side[0].begin(), slot.side[0].end());
      syms.push_back(end);
      out.push_back(detail::learned_pattern(cls, std::move(syms), 1));
      continue;
    }
    for (int d = 0; d < 2; ++d) {
      std::vector<std::string> syms{cls, std::to_string(d)};
      syms.insert(syms.end(), slot.side[d].begin(), slot.side[d].end());
      syms.push_back(end);
      out.push_back(detail::learned_pattern(cls + "." + std::to_string(d), std::move(syms), 2));
    }
  }
  const std::string top = ids.next_class();
  std::vector<std::string> syms{top};
  syms.insert(syms.end(), abstract_refs.begin(), abstract_refs.end());
  syms.push_back(terminator_of(top));
  out.push_back(detail::learned_pattern(top, std::move(syms), 1));
  return out;
}

/// `%k : <member> #%k`.
inline SPPattern wholesale_pattern(const SPPattern& member, FreshIds& ids) {
  const std::string cls = ids.next_class();
  std::vector<std::string> syms{cls};
  syms.insert(syms.end(), member.symbols.begin(), member.symbols.end());
  syms.push_back(terminator_of(cls));
  return detail::learned_pattern(cls, std::move(syms), 1);
}

/// G: total cost of every symbol of every pattern.
inline double grammar_cost(const Grammar& g, const CostModel& cm) {
  double total = 0;
  for (const auto& p : g.patterns)
    for (const auto& s : p.symbols) total += cm.cost(s);
  return total;
}

inline double grammar_cost(const Grammar& g) {
  if (g.empty()) return 0;
  return grammar_cost(g, g.cost_model());
}

inline double raw_cost(const SPPattern& p, const CostModel& cm) {
  double total = 0;
  for (const auto& s : p.symbols) total += cm.cost(s);
  return total;
}

/// Best cd found for `member` against `g`, or 0 when nothing compresses it.
inline double best_cd(const SPPattern& member, const Grammar& g, const SearchParams& ap,
                      const CostModel& cm) {
  if (g.empty()) return 0;
  SearchParams p = ap;
  p.top_k = 1;
  auto res = build_alignments(member, g, p, cm);
  return res.empty() ? 0.0 : std::max(0.0, res.front().result.cd);
}

/// E: sum over members of raw cost minus the best cd (raw cost when no
/// alignment has cd > 0).
inline double corpus_encoding_cost(const Grammar& g, std::span<const SPPattern> corpus,
                                   const SearchParams& ap, const CostModel& cm) {
  double total = 0;
  for (const auto& m : corpus) total += raw_cost(m, cm) - best_cd(m, g, ap, cm);
  return total;
}

/// Cost model covering a grammar and the corpus it is scored against.
inline CostModel learning_cost_model(const Grammar& g, std::span<const SPPattern> corpus) {
  std::vector<SPPattern> all(g.patterns.begin(), g.patterns.end());
  all.insert(all.end(), corpus.begin(), corpus.end());
  return build_cost_model(g.cost_kind, all);
}

inline double corpus_encoding_cost(const Grammar& g, std::span<const SPPattern> corpus,
                                   const SearchParams& ap = {}) {
  if (corpus.empty()) return 0;
  return corpus_encoding_cost(g, corpus, ap, learning_cost_model(g, corpus));
}

struct LearnParams {
  std::size_t grammar_beam = 10;
  std::size_t max_passes = 3;
  long id_seed = 1;
  CostModelKind cost_kind = CostModelKind::Uniform;
  SearchParams align_params{20, 6, 1, 1, 20};

  void check() const {
    if (grammar_beam < 1 || max_passes < 1) throw Error("learn parameters must be >= 1");
    align_params.check();
  }
};

struct ScoredGrammar {
  Grammar grammar;
  double g = 0;
  double e = 0;
  double t = 0;
};

/// Memo of per-member encoding costs, keyed by grammar text, corpus
/// extent and member index.
using EncodingCache = std::map<std::string, double>;

inline ScoredGrammar score_grammar(const Grammar& g, std::span<const SPPattern> corpus,
                                   const SearchParams& ap, EncodingCache* cache = nullptr,
                                   const std::string& grammar_key = {}) {
  ScoredGrammar s{g, 0, 0, 0};
  if (g.empty() && corpus.empty()) return s;
  const auto cm = learning_cost_model(g, corpus);
  s.g = grammar_cost(g, cm);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto key = grammar_key + "|" + std::to_string(corpus.size()) + "|" + std::to_string(i);
    if (cache) {
      if (auto it = cache->find(key); it != cache->end()) {
        s.e += it->second;
        continue;
      }
    }
    const double e = raw_cost(corpus[i], cm) - best_cd(corpus[i], g, ap, cm);
    if (cache) cache->emplace(key, e);
    s.e += e;
  }
  s.t = s.g + s.e;
  return s;
}

/// Grammar storing every member wholesale: the reference point for learning.
inline ScoredGrammar baseline_grammar(std::span<const SPPattern> corpus, const LearnParams& params) {
  FreshIds ids(params.id_seed);
  Grammar g;
  g.cost_kind = params.cost_kind;
  for (const auto& m : corpus) g.add(wholesale_pattern(m, ids));
  return score_grammar(g, corpus, params.align_params);
}

namespace detail {

inline std::string pattern_text(const SPPattern& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i == p.id_prefix_len && i > 0) s += ": ";
    s += p.symbols[i] + " ";
  }
  return s;
}

inline std::string grammar_text(const Grammar& g) {
  std::vector<std::string> lines;
  for (const auto& p : g.patterns) lines.push_back(pattern_text(p));
  std::sort(lines.begin(), lines.end());
  std::string s;
  for (auto& l : lines) s += l + "\n";
  return s;
}

inline bool contains_content(const Grammar& g, const SPPattern& p) {
  return std::any_of(g.patterns.begin(), g.patterns.end(),
                     [&](const SPPattern& q) { return q.same_content(p); });
}

}  // namespace detail

/// Best two-row alignment of `member` against `g`, if any compresses it.
inline std::optional<ScoredAlignment> best_pairwise(const SPPattern& member, const Grammar& g,
                                                    const SearchParams& ap, const CostModel& cm) {
  if (g.empty()) return std::nullopt;
  SearchParams p = ap;
  p.max_stages = 1;
  p.top_k = 1;
  auto res = build_alignments(member, g, p, cm);
  if (res.empty()) return std::nullopt;
  return res.front();
}

struct LearnResult {
  std::vector<ScoredGrammar> grammars;  // best first
  CandidatePool pool;
};

/// Processes the corpus in order for `max_passes` passes, keeping a beam of
/// grammars ranked by T (ties: smaller G, then grammar text).
inline LearnResult learn(std::span<const SPPattern> corpus, const LearnParams& params,
                         const Grammar& initial = {}) {
  params.check();
  if (corpus.empty()) throw Error("learn: empty corpus");
  for (const auto& m : corpus) check_pattern(m);

  FreshIds ids(params.id_seed);
  // Continue numbering past any fresh tokens already in the initial grammar.
  for (const auto& p : initial.patterns)
    for (const auto& s : p.symbols) {
      std::string_view v(s);
      if (v.starts_with("#")) v.remove_prefix(1);
      if (v.size() > 1 && v.front() == '%' &&
          std::all_of(v.begin() + 1, v.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        const long n = std::stol(std::string(v.substr(1)));
        while (ids.peek() <= n) ids.next_class();
      }
    }

  Grammar start = initial;
  start.cost_kind = params.cost_kind;
  std::vector<Grammar> beam{start};
  CandidatePool pool;
  const auto& ap = params.align_params;
  EncodingCache cache;  // valid only within one corpus: keys use member indices

  auto rank = [](const ScoredGrammar& x, const ScoredGrammar& y, const std::string& tx,
                 const std::string& ty) {
    if (std::abs(x.t - y.t) > kCostEps) return x.t < y.t;
    if (std::abs(x.g - y.g) > kCostEps) return x.g < y.g;
    return tx < ty;
  };

  for (std::size_t pass = 0; pass < params.max_passes; ++pass) {
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const auto& member = corpus[i];
      const auto seen = pass == 0 ? corpus.subspan(0, i + 1) : corpus;

      std::vector<SPPattern> derived_all;
      std::map<std::string, std::vector<SPPattern>> derived_memo;
      std::optional<SPPattern> wholesale;

      for (auto& g : beam) {
        const auto cm = learning_cost_model(g, seen);
        auto pair = best_pairwise(member, g, ap, cm);
        if (!pair) {
          if (best_cd(member, g, ap, cm) > kCostEps) continue;
          if (!wholesale) wholesale = wholesale_pattern(member, ids);
          if (!detail::contains_content(g, *wholesale)) g.add(*wholesale);
          continue;
        }
        const auto key = detail::alignment_key(pair->alignment) + "/" +
                         detail::pattern_text(pair->alignment.row(1));
        auto it = derived_memo.find(key);
        if (it == derived_memo.end())
          it = derived_memo.emplace(key, derive_patterns(pair->alignment, ids)).first;
        for (const auto& d : it->second)
          if (std::none_of(derived_all.begin(), derived_all.end(),
                           [&](const SPPattern& q) { return q.same_content(d); }))
            derived_all.push_back(d);
      }
      if (wholesale) pool = unify_into_pool(std::move(pool), *wholesale);
      for (const auto& d : derived_all) pool = unify_into_pool(std::move(pool), d);

      std::vector<std::pair<ScoredGrammar, std::string>> options;
      std::map<std::string, bool> known;
      auto offer = [&](const Grammar& g) {
        auto text = detail::grammar_text(g);
        if (!known.emplace(text, true).second) return;
        auto scored = score_grammar(g, seen, ap, &cache, text);
        options.emplace_back(std::move(scored), std::move(text));
      };
      for (const auto& g : beam) {
        offer(g);
        std::vector<const SPPattern*> fresh;
        for (const auto& d : derived_all)
          if (!detail::contains_content(g, d)) fresh.push_back(&d);
        for (const auto* d : fresh) {
          Grammar h = g;
          h.add(*d);
          offer(h);
        }
        if (fresh.size() >= 2) {
          Grammar h = g;
          for (const auto* d : fresh) h.add(*d);
          offer(h);
        }
      }
      std::stable_sort(options.begin(), options.end(), [&](const auto& x, const auto& y) {
        return rank(x.first, y.first, x.second, y.second);
      });
      if (options.size() > params.grammar_beam) options.resize(params.grammar_beam);
      beam.clear();
      for (auto& o : options) beam.push_back(std::move(o.first.grammar));
    }
  }

  LearnResult out;
  std::vector<std::pair<ScoredGrammar, std::string>> final_scores;
  for (const auto& g : beam)
    final_scores.emplace_back(score_grammar(g, corpus, ap, &cache, detail::grammar_text(g)),
                              detail::grammar_text(g));
  std::stable_sort(final_scores.begin(), final_scores.end(), [&](const auto& x, const auto& y) {
    return rank(x.first, y.first, x.second, y.second);
  });
  for (auto& s : final_scores) out.grammars.push_back(std::move(s.first));
  out.pool = std::move(pool);
  return out;
}

}  // namespace sp
