#pragma once

// JSON records of scored alignments.

#include <optional>
#include <string>

#include <json.hpp>

#include "sp/core.hpp"
#include "sp/score.hpp"

namespace sp {

using Json = nlohmann::ordered_json;

struct AlignmentRecord {
  Alignment alignment;
  EncodedResult result;
};

/// Keys in order: rows, columns, code, b_new, b_code, cd, probability.
/// A column is an object mapping row index (as a string) to position.
inline Json export_alignment(const Alignment& a, const std::optional<EncodedResult>& result) {
  if (!result) throw Error("export_alignment: alignment has not been scored");
  require_legal(a);
  Json doc;
  Json rows = Json::array();
  for (const auto& p : a.rows) {
    Json row;
    row["pattern_id"] = p->pattern_id;
    row["role"] = std::string(to_string(p->role));
    row["tokens"] = p->symbols;
    row["id_prefix_len"] = p->id_prefix_len;
    row["frequency"] = p->frequency;
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  Json cols = Json::array();
  for (const auto& col : a.columns) {
    Json cell = Json::object();
    for (std::size_t r = 0; r < col.size(); ++r)
      if (col[r] != kNoSymbol) cell[std::to_string(r)] = col[r];
    cols.push_back(std::move(cell));
  }
  doc["columns"] = std::move(cols);
  doc["code"] = result->code;
  doc["b_new"] = result->b_new;
  doc["b_code"] = result->b_code;
  doc["cd"] = result->cd;
  doc["probability"] = result->probability ? Json(*result->probability) : Json(nullptr);
  return doc;
}

inline AlignmentRecord parse_alignment_record(const Json& doc) {
  try {
    AlignmentRecord rec;
    for (const auto& row : doc.at("rows")) {
      SPPattern p;
      p.pattern_id = row.at("pattern_id").get<std::string>();
      const auto role = row.at("role").get<std::string>();
      if (role != "New" && role != "Old") throw Error("unknown role '" + role + "'");
      p.role = role == "New" ? Role::New : Role::Old;
      p.symbols = row.at("tokens").get<std::vector<std::string>>();
      p.id_prefix_len = row.value("id_prefix_len", std::size_t{0});
      p.frequency = row.value("frequency", 1L);
      check_pattern(p);
      rec.alignment.rows.push_back(std::make_shared<const SPPattern>(std::move(p)));
    }
    for (const auto& cell : doc.at("columns")) {
      Column col(rec.alignment.rows.size(), kNoSymbol);
      for (const auto& [key, pos] : cell.items()) {
        const auto r = std::stoul(key);
        if (r >= col.size()) throw Error("column refers to missing row " + key);
        col[r] = pos.get<int>();
      }
      rec.alignment.columns.push_back(std::move(col));
    }
    require_legal(rec.alignment);
    rec.result.code = doc.at("code").get<std::vector<std::string>>();
    rec.result.b_new = doc.at("b_new").get<double>();
    rec.result.b_code = doc.at("b_code").get<double>();
    rec.result.cd = doc.at("cd").get<double>();
    if (!doc.at("probability").is_null()) rec.result.probability = doc.at("probability").get<double>();
    return rec;
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed alignment record: ") + e.what());
  }
}

inline AlignmentRecord parse_alignment_record(const std::string& text) {
  try {
    return parse_alignment_record(Json::parse(text));
  } catch (const Json::parse_error& e) {
    throw Error(std::string("malformed alignment record: ") + e.what());
  }
}

}  // namespace sp
