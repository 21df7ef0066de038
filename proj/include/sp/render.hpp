#pragma once

// ASCII rendering of alignments in the style of printed alignment figures:
// one line per row, connector lines between them, matched symbols joined
// by vertical bars.

#include <algorithm>
#include <string>
#include <vector>

#include "sp/core.hpp"

namespace sp {

struct RenderOptions {
  std::size_t max_width = 120;  // >= 20
  bool show_row_numbers = true;

  void check() const {
    if (max_width < 20) throw Error("render: max_width must be >= 20");
  }
};

/// Renders `a` row by row (row 0 first) with a connector line between
/// adjacent rows. Each column is as wide as its widest symbol plus one.
///
/// A column holding symbols in rows r1 < ... < rn (n >= 2) is drawn as one
/// vertical chain from r1 to rn: a bar sits under the first character of
/// the column in every connector line between r1 and rn, and in the symbol
/// line of any row in between that has no symbol there. Adjacent rows that
/// both hold a symbol are therefore always joined. Columns that do not fit
/// in `max_width` continue in further panels separated by a blank line.
inline std::string render_alignment(const Alignment& a, const RenderOptions& opts = {}) {
  opts.check();
  require_legal(a);
  const std::size_t rows = a.row_count();
  const std::size_t ncols = a.columns.size();

  std::vector<std::size_t> width(ncols, 1);
  std::vector<std::size_t> top(ncols, rows), bottom(ncols, 0);
  for (std::size_t c = 0; c < ncols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) {
      const int pos = a.columns[c][r];
      if (pos == kNoSymbol) continue;
      width[c] = std::max(width[c], a.row(r).symbols[static_cast<std::size_t>(pos)].size() + 1);
      top[c] = std::min(top[c], r);
      bottom[c] = std::max(bottom[c], r);
    }
  }

  const std::size_t label = opts.show_row_numbers ? std::to_string(rows - 1).size() : 0;
  const std::size_t margin = opts.show_row_numbers ? 2 * (label + 2) : 0;
  const std::size_t body_width = opts.max_width > margin ? opts.max_width - margin : 1;

  std::vector<std::pair<std::size_t, std::size_t>> panels;  // [begin, end)
  for (std::size_t c = 0; c < ncols;) {
    std::size_t used = 0, e = c;
    while (e < ncols && (e == c || used + width[e] <= body_width)) used += width[e++];
    panels.emplace_back(c, e);
    c = e;
  }

  auto rtrim = [](std::string s) {
    s.erase(s.find_last_not_of(' ') + 1);
    return s;
  };
  auto pad_left = [](const std::string& s, std::size_t w) {
    return std::string(w > s.size() ? w - s.size() : 0, ' ') + s;
  };
  auto chained = [&](std::size_t c) { return top[c] < bottom[c]; };

  std::string out;
  for (std::size_t pi = 0; pi < panels.size(); ++pi) {
    const auto [b, e] = panels[pi];
    if (pi) out += '\n';
    for (std::size_t r = 0; r < rows; ++r) {
      if (r > 0) {
        std::string conn;
        for (std::size_t c = b; c < e; ++c) {
          const bool bar = chained(c) && top[c] < r && r <= bottom[c];
          conn += (bar ? "|" : " ") + std::string(width[c] - 1, ' ');
        }
        out += rtrim(std::string(opts.show_row_numbers ? label + 2 : 0, ' ') + conn) + '\n';
      }
      std::string line;
      for (std::size_t c = b; c < e; ++c) {
        const int pos = a.columns[c][r];
        std::string cell;
        if (pos != kNoSymbol)
          cell = a.row(r).symbols[static_cast<std::size_t>(pos)];
        else if (chained(c) && top[c] < r && r < bottom[c])
          cell = "|";
        cell.resize(width[c], ' ');
        line += cell;
      }
      if (opts.show_row_numbers) {
        const auto n = std::to_string(r);
        line = pad_left(n, label) + "  " + line + " " + n;
      }
      out += rtrim(line) + '\n';
    }
  }
  return out;
}

}  // namespace sp
