#pragma once

// Value types shared by every stage of the engine: symbols, patterns,
// alignments, grammars and the symbol cost model.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed pattern text. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// An oracle or search was asked to run outside its size guard.
class GuardError : public Error {
 public:
  using Error::Error;
};

enum class Role { New, Old };
enum class Provenance { User, Learned };
enum class SymbolClass { Identification, Contents };

inline std::string_view to_string(Role r) { return r == Role::New ? "New" : "Old"; }

inline constexpr std::string_view kPrefixDelimiter = ":";

inline bool is_valid_token(std::string_view tok) {
  if (tok.empty() || tok == kPrefixDelimiter) return false;
  return std::none_of(tok.begin(), tok.end(), [](char c) {
    return c == ';' || c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  });
}

struct SPSymbol {
  std::string token;
  SymbolClass cls = SymbolClass::Contents;
};

struct SPPattern {
  std::string pattern_id;
  std::vector<std::string> symbols;
  std::size_t id_prefix_len = 0;
  long frequency = 1;
  Role role = Role::Old;
  Provenance provenance = Provenance::User;

  std::size_t size() const noexcept { return symbols.size(); }

  SymbolClass class_of(std::size_t pos) const noexcept {
    return pos < id_prefix_len ? SymbolClass::Identification : SymbolClass::Contents;
  }
  bool is_identification(std::size_t pos) const noexcept { return pos < id_prefix_len; }

  SPSymbol symbol(std::size_t pos) const { return {symbols.at(pos), class_of(pos)}; }

  /// Equality on the parts that define a pattern's content.
  bool same_content(const SPPattern& o) const {
    return id_prefix_len == o.id_prefix_len && symbols == o.symbols;
  }
};

/// Throws Error when `p` breaks a pattern invariant.
inline void check_pattern(const SPPattern& p) {
  if (p.symbols.empty()) throw Error("pattern '" + p.pattern_id + "' has no symbols");
  if (p.frequency < 1) throw Error("pattern '" + p.pattern_id + "' has frequency < 1");
  if (p.id_prefix_len >= p.symbols.size())
    throw Error("pattern '" + p.pattern_id + "' has no contents symbols");
  if (p.role == Role::New && p.id_prefix_len != 0)
    throw Error("New pattern '" + p.pattern_id + "' has identification symbols");
  for (const auto& s : p.symbols)
    if (!is_valid_token(s)) throw Error("invalid token '" + s + "'");
}

inline SPPattern make_new_pattern(std::vector<std::string> tokens, std::string id = "new") {
  SPPattern p;
  p.pattern_id = std::move(id);
  p.symbols = std::move(tokens);
  p.role = Role::New;
  check_pattern(p);
  return p;
}

inline SPPattern make_old_pattern(std::string id, std::vector<std::string> tokens,
                                  std::size_t id_prefix_len, long frequency = 1,
                                  Provenance prov = Provenance::User) {
  SPPattern p;
  p.pattern_id = std::move(id);
  p.symbols = std::move(tokens);
  p.id_prefix_len = id_prefix_len;
  p.frequency = frequency;
  p.role = Role::Old;
  p.provenance = prov;
  check_pattern(p);
  return p;
}

inline std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string tok; in >> tok;) out.push_back(std::move(tok));
  return out;
}

/// Parses one line of grammar or corpus text:
///   [(freq)] sym sym [: sym ...]
/// Anything after `;` is ignored.
inline SPPattern parse_pattern_line(std::string_view line, Role default_role,
                                    std::string pattern_id = {}, std::size_t line_no = 0) {
  if (auto semi = line.find(';'); semi != std::string_view::npos) line = line.substr(0, semi);
  auto toks = split_tokens(line);

  SPPattern p;
  p.pattern_id = std::move(pattern_id);
  p.role = default_role;

  std::size_t first = 0;
  if (!toks.empty() && toks[0].front() == '(' && toks[0].back() == ')') {
    if (default_role == Role::New) throw ParseError("frequency prefix not allowed here", line_no);
    std::string_view digits(toks[0]);
    digits = digits.substr(1, digits.size() - 2);
    if (digits.empty() || digits.size() > 12 ||
        !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
      throw ParseError("malformed frequency '" + toks[0] + "'", line_no);
    p.frequency = std::stol(std::string(digits));
    if (p.frequency < 1) throw ParseError("frequency must be >= 1", line_no);
    first = 1;
  }

  std::optional<std::size_t> colon;
  for (std::size_t i = first; i < toks.size(); ++i) {
    if (toks[i] == kPrefixDelimiter) {
      if (default_role == Role::New) throw ParseError("':' not allowed in a New pattern", line_no);
      if (colon) throw ParseError("more than one ':'", line_no);
      colon = p.symbols.size();
      continue;
    }
    if (!is_valid_token(toks[i])) throw ParseError("invalid token '" + toks[i] + "'", line_no);
    p.symbols.push_back(toks[i]);
  }
  if (p.symbols.empty()) throw ParseError("empty symbol list", line_no);
  p.id_prefix_len = colon.value_or(0);
  if (p.id_prefix_len >= p.symbols.size())
    throw ParseError("':' must be followed by at least one contents symbol", line_no);
  return p;
}

// ---------------------------------------------------------------------------
// Cost model

enum class CostModelKind { Uniform, Frequency };

inline std::string_view to_string(CostModelKind k) {
  return k == CostModelKind::Uniform ? "uniform" : "frequency";
}

inline CostModelKind parse_cost_model_kind(std::string_view s) {
  if (s == "uniform") return CostModelKind::Uniform;
  if (s == "frequency") return CostModelKind::Frequency;
  throw Error("unknown cost model '" + std::string(s) + "'");
}

class CostModel {
 public:
  CostModel() = default;
  CostModel(CostModelKind kind, std::map<std::string, double> costs)
      : kind_(kind), costs_(std::move(costs)) {}

  CostModelKind kind() const noexcept { return kind_; }
  const std::map<std::string, double>& costs() const noexcept { return costs_; }
  bool contains(const std::string& tok) const { return costs_.count(tok) != 0; }

  double cost(const std::string& tok) const {
    auto it = costs_.find(tok);
    if (it == costs_.end()) throw Error("token '" + tok + "' missing from cost model");
    return it->second;
  }

  double kraft_sum() const {
    double s = 0;
    for (const auto& [_, c] : costs_) s += std::exp2(-c);
    return s;
  }

  /// Uniform cost: every token costs `uniform_cost`; otherwise nullopt.
  std::optional<double> uniform_cost() const {
    if (kind_ != CostModelKind::Uniform || costs_.empty()) return std::nullopt;
    return costs_.begin()->second;
  }

 private:
  CostModelKind kind_ = CostModelKind::Uniform;
  std::map<std::string, double> costs_;
};

inline double uniform_bits(std::size_t alphabet_size) {
  if (alphabet_size <= 2) return 1.0;
  return std::ceil(std::log2(static_cast<double>(alphabet_size)));
}

/// Uniform: ceil(log2 A) bits per token (at least 1).
/// Frequency: -log2(f(s)/F), f weighted by pattern frequency; a one-token
/// alphabet gets 1 bit so that every cost stays positive.
inline CostModel build_cost_model(CostModelKind kind, std::span<const SPPattern> patterns,
                                  std::span<const std::string> extra_tokens = {}) {
  std::map<std::string, double> counts;
  for (const auto& p : patterns)
    for (const auto& s : p.symbols) counts[s] += static_cast<double>(p.frequency);
  for (const auto& t : extra_tokens) counts.try_emplace(t, 0.0);
  if (counts.empty()) throw Error("cannot build a cost model over an empty alphabet");

  std::map<std::string, double> costs;
  if (kind == CostModelKind::Uniform) {
    const double c = uniform_bits(counts.size());
    for (const auto& [tok, _] : counts) costs[tok] = c;
  } else {
    double total = 0;
    for (auto& [_, f] : counts) {
      if (f <= 0) f = 1;  // extra tokens never seen in a pattern
      total += f;
    }
    for (const auto& [tok, f] : counts) {
      double c = -std::log2(f / total);
      costs[tok] = c > 0 ? c : 1.0;
    }
  }
  return CostModel(kind, std::move(costs));
}

// ---------------------------------------------------------------------------
// Grammar

struct Grammar {
  std::vector<SPPattern> patterns;
  CostModelKind cost_kind = CostModelKind::Uniform;

  bool empty() const noexcept { return patterns.empty(); }
  std::size_t size() const noexcept { return patterns.size(); }

  const SPPattern* find(const std::string& id) const {
    for (const auto& p : patterns)
      if (p.pattern_id == id) return &p;
    return nullptr;
  }

  /// Adds `p`, or sums its frequency into an existing pattern with the
  /// same content. Returns true when `p` was a duplicate.
  bool add(SPPattern p) {
    p.role = Role::Old;
    for (auto& q : patterns) {
      if (q.same_content(p)) {
        q.frequency += p.frequency;
        return true;
      }
    }
    if (p.pattern_id.empty() || find(p.pattern_id)) p.pattern_id = next_free_id();
    patterns.push_back(std::move(p));
    return false;
  }

  std::string next_free_id() const {
    for (std::size_t n = patterns.size() + 1;; ++n) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "g%04zu", n);
      if (!find(buf)) return buf;
    }
  }

  /// Cost model over this grammar plus any extra patterns (typically New).
  CostModel cost_model(std::span<const SPPattern> extra = {}) const {
    std::vector<SPPattern> all(patterns.begin(), patterns.end());
    all.insert(all.end(), extra.begin(), extra.end());
    return build_cost_model(cost_kind, all);
  }
};

// ---------------------------------------------------------------------------
// Alignment

inline constexpr int kNoSymbol = -1;

/// One column: for every row, the symbol position held there or kNoSymbol.
using Column = std::vector<int>;

struct Alignment {
  std::vector<std::shared_ptr<const SPPattern>> rows;
  std::vector<Column> columns;

  std::size_t row_count() const noexcept { return rows.size(); }
  const SPPattern& row(std::size_t r) const { return *rows.at(r); }

  std::size_t occupancy(std::size_t c) const {
    return static_cast<std::size_t>(
        std::count_if(columns[c].begin(), columns[c].end(), [](int v) { return v != kNoSymbol; }));
  }

  /// Token of column `c` (from its first occupied row).
  const std::string& token(std::size_t c) const {
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (columns[c][r] != kNoSymbol) return rows[r]->symbols[columns[c][r]];
    throw Error("empty column " + std::to_string(c));
  }

  std::vector<std::string> row_ids() const {
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (const auto& r : rows) ids.push_back(r->pattern_id);
    return ids;
  }
};

/// The single-row alignment of a New pattern on its own.
inline Alignment degenerate_alignment(const SPPattern& new_p) {
  Alignment a;
  a.rows.push_back(std::make_shared<const SPPattern>(new_p));
  for (std::size_t i = 0; i < new_p.size(); ++i) a.columns.push_back(Column{static_cast<int>(i)});
  return a;
}

struct Violation {
  std::string rule;
  std::optional<std::size_t> column;
  std::optional<std::size_t> row;
  std::string message;
};

using LegalityReport = std::vector<Violation>;

inline LegalityReport validate_alignment(const Alignment& a) {
  LegalityReport out;
  auto add = [&](std::string rule, std::optional<std::size_t> col, std::optional<std::size_t> row,
                 std::string msg) {
    out.push_back({std::move(rule), col, row, std::move(msg)});
  };

  if (a.rows.empty()) {
    add("rows", std::nullopt, std::nullopt, "alignment has no rows");
    return out;
  }
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    if (!a.rows[r]) {
      add("rows", std::nullopt, r, "row has no pattern");
      return out;
    }
    const Role want = r == 0 ? Role::New : Role::Old;
    if (a.rows[r]->role != want)
      add("role", std::nullopt, r,
          "row " + std::to_string(r) + " must hold a " + std::string(to_string(want)) + " pattern");
  }

  const std::size_t nrows = a.rows.size();
  std::vector<std::vector<std::size_t>> seen(nrows);
  for (std::size_t r = 0; r < nrows; ++r) seen[r].assign(a.rows[r]->size(), 0);
  std::vector<long> last_pos(nrows, -1);
  bool any_shared = false;

  for (std::size_t c = 0; c < a.columns.size(); ++c) {
    const auto& col = a.columns[c];
    if (col.size() != nrows) {
      add("shape", c, std::nullopt, "column " + std::to_string(c) + " does not span every row");
      continue;
    }
    std::optional<std::string> tok;
    std::size_t held = 0;
    bool mismatch = false;
    for (std::size_t r = 0; r < nrows; ++r) {
      const int pos = col[r];
      if (pos == kNoSymbol) continue;
      if (pos < 0 || static_cast<std::size_t>(pos) >= a.rows[r]->size()) {
        add("position", c, r, "position " + std::to_string(pos) + " out of range");
        continue;
      }
      ++held;
      ++seen[r][pos];
      if (pos <= last_pos[r])
        add("crossing", c, r,
            "row " + std::to_string(r) + " positions not increasing at column " + std::to_string(c));
      last_pos[r] = pos;
      const auto& t = a.rows[r]->symbols[pos];
      if (!tok)
        tok = t;
      else if (*tok != t)
        mismatch = true;
    }
    if (held == 0) add("empty column", c, std::nullopt, "column " + std::to_string(c) + " is empty");
    if (mismatch)
      add("mismatched column", c, std::nullopt,
          "column " + std::to_string(c) + " holds different tokens");
    if (held >= 2) any_shared = true;
  }

  for (std::size_t r = 0; r < nrows; ++r)
    for (std::size_t i = 0; i < seen[r].size(); ++i)
      if (seen[r][i] != 1)
        add("coverage", std::nullopt, r,
            "symbol " + std::to_string(i) + " of row " + std::to_string(r) + " appears " +
                std::to_string(seen[r][i]) + " times");

  if (nrows >= 2 && !any_shared)
    add("unconnected", std::nullopt, std::nullopt, "no column holds symbols from two rows");
  return out;
}

inline bool is_legal(const Alignment& a) { return validate_alignment(a).empty(); }

inline void require_legal(const Alignment& a) {
  auto report = validate_alignment(a);
  if (!report.empty()) throw Error("illegal alignment: " + report.front().message);
}

}  // namespace sp
