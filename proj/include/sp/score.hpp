#pragma once

// Information-compression scoring of alignments, relative probabilities of
// competing alignments, and extraction of inferences.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "sp/core.hpp"

namespace sp {

struct EncodedResult {
  std::vector<std::string> code;
  double b_new = 0;
  double b_code = 0;
  double cd = 0;
  std::optional<double> probability;
};

/// How one column settles the identification symbols it holds.
///
/// Every symbol in a column carries the same token. Each New symbol and
/// each Old contents symbol in the column refers to one identification
/// symbol there, which is then accounted for; identification symbols left
/// without a referrer are coded. Two bare identification symbols lined up
/// with each other therefore explain nothing.
struct ColumnRoles {
  bool has_new = false;
  std::size_t contents = 0;        // Old contents symbols
  std::size_t identification = 0;  // Old identification symbols
  std::size_t occupancy = 0;

  bool new_matched() const { return has_new && occupancy >= 2; }
  std::size_t referrers() const { return (has_new ? 1 : 0) + contents; }
  std::size_t coded_identification() const {
    return identification > referrers() ? identification - referrers() : 0;
  }
};

inline ColumnRoles column_roles(const Alignment& a, std::size_t c) {
  ColumnRoles roles;
  const auto& col = a.columns[c];
  for (std::size_t r = 0; r < col.size(); ++r) {
    if (col[r] == kNoSymbol) continue;
    ++roles.occupancy;
    if (r == 0)
      roles.has_new = true;
    else if (a.rows[r]->is_identification(static_cast<std::size_t>(col[r])))
      ++roles.identification;
    else
      ++roles.contents;
  }
  return roles;
}

/// Scores `a`: b_new sums matched New symbols, b_code sums the Old
/// identification symbols left in the code, cd = b_new - b_code. The code
/// lists, in column order, those identification symbols followed by any
/// unmatched New symbol of the same column. Within a column the referred
/// identification symbols are taken in row order.
inline EncodedResult encode(const Alignment& a, const CostModel& cm) {
  require_legal(a);
  EncodedResult res;
  for (std::size_t c = 0; c < a.columns.size(); ++c) {
    const auto roles = column_roles(a, c);
    const auto& col = a.columns[c];
    std::size_t unreferred = roles.referrers();
    for (std::size_t r = 1; r < col.size(); ++r) {
      if (col[r] == kNoSymbol) continue;
      const auto pos = static_cast<std::size_t>(col[r]);
      if (!a.rows[r]->is_identification(pos)) continue;
      if (unreferred > 0) {
        --unreferred;
        continue;
      }
      const auto& tok = a.rows[r]->symbols[pos];
      res.code.push_back(tok);
      res.b_code += cm.cost(tok);
    }
    if (roles.has_new) {
      const auto& tok = a.rows[0]->symbols[static_cast<std::size_t>(col[0])];
      if (roles.new_matched())
        res.b_new += cm.cost(tok);
      else
        res.code.push_back(tok);
    }
  }
  res.cd = res.b_new - res.b_code;
  return res;
}

/// p_i = 2^-b_code_i / sum_j 2^-b_code_j, written into each result.
inline std::vector<double> relative_probabilities(std::vector<EncodedResult>& results) {
  std::vector<double> probs(results.size(), 0.0);
  if (results.empty()) return probs;
  double min_code = results.front().b_code;
  for (const auto& r : results) min_code = std::min(min_code, r.b_code);
  double total = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    probs[i] = std::exp2(-(results[i].b_code - min_code));  // shifted for range
    total += probs[i];
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    probs[i] /= total;
    results[i].probability = probs[i];
  }
  return probs;
}

struct Inference {
  std::string token;
  std::size_t row = 0;
  std::size_t column = 0;
};

/// Unmatched contents symbols of Old rows, in column order.
inline std::vector<Inference> infer(const Alignment& a) {
  require_legal(a);
  std::vector<Inference> out;
  for (std::size_t c = 0; c < a.columns.size(); ++c) {
    if (a.occupancy(c) != 1) continue;
    const auto& col = a.columns[c];
    for (std::size_t r = 1; r < col.size(); ++r) {
      if (col[r] == kNoSymbol) continue;
      const auto pos = static_cast<std::size_t>(col[r]);
      if (!a.rows[r]->is_identification(pos)) out.push_back({a.rows[r]->symbols[pos], r, c});
    }
  }
  return out;
}

inline std::vector<std::string> inferred_tokens(const Alignment& a) {
  std::vector<std::string> out;
  for (auto& inf : infer(a)) out.push_back(std::move(inf.token));
  return out;
}

}  // namespace sp
