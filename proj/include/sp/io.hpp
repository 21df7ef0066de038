#pragma once

// Grammar and corpus files. One pattern per line; `;` starts a comment;
// an optional `(<freq>)` prefix and a single `:` after the identification
// symbols are allowed in grammar files only.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sp/core.hpp"

namespace sp {

/// Pattern id derived from the identification symbols, e.g. "NP.1".
/// Patterns without identification symbols get none (the grammar numbers them).
inline std::string default_pattern_id(const SPPattern& p) {
  std::string id;
  for (std::size_t i = 0; i < p.id_prefix_len; ++i) id += (i ? "." : "") + p.symbols[i];
  return id;
}

inline std::string format_pattern_line(const SPPattern& p) {
  std::string line;
  if (p.role == Role::Old && p.frequency != 1) line = "(" + std::to_string(p.frequency) + ") ";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) line += ' ';
    if (i == p.id_prefix_len && i > 0) line += ": ";
    line += p.symbols[i];
  }
  return line;
}

namespace detail {

inline bool is_blank(std::string_view line) {
  if (auto semi = line.find(';'); semi != std::string_view::npos) line = line.substr(0, semi);
  return line.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error("cannot read '" + path + "'");
  return ss.str();
}

}  // namespace detail

inline Grammar parse_grammar(std::string_view text, std::vector<std::string>* warnings = nullptr,
                             CostModelKind kind = CostModelKind::Uniform) {
  Grammar g;
  g.cost_kind = kind;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    auto p = parse_pattern_line(line, Role::Old, {}, line_no);
    p.pattern_id = default_pattern_id(p);
    if (g.add(p) && warnings)
      warnings->push_back("line " + std::to_string(line_no) + ": duplicate pattern '" +
                          format_pattern_line(p) + "' unified");
  }
  return g;
}

inline Grammar load_grammar(const std::string& path, std::vector<std::string>* warnings = nullptr,
                            CostModelKind kind = CostModelKind::Uniform) {
  return parse_grammar(detail::read_file(path), warnings, kind);
}

inline std::string format_grammar(const Grammar& g) {
  std::string out;
  for (const auto& p : g.patterns) out += format_pattern_line(p) + "\n";
  return out;
}

inline void save_grammar(const Grammar& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << format_grammar(g);
  out.flush();
  if (!out) throw Error("write failed for '" + path + "'");
}

inline std::vector<SPPattern> parse_corpus(std::string_view text) {
  std::vector<SPPattern> corpus;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    corpus.push_back(
        parse_pattern_line(line, Role::New, "new" + std::to_string(corpus.size()), line_no));
  }
  return corpus;
}

inline std::vector<SPPattern> load_corpus(const std::string& path) {
  return parse_corpus(detail::read_file(path));
}

}  // namespace sp
