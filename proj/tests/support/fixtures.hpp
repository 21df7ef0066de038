#pragma once

#include <string>

#include "sp/sp.hpp"
#include "support/figure.hpp"
#include "support/pictures.hpp"

namespace sp_test {

inline std::string data_path(const std::string& name) { return std::string(SP_DATA_DIR) + "/" + name; }

inline sp::Grammar fortune_grammar() { return sp::load_grammar(data_path("figure4.spg")); }

inline sp::SPPattern fortune_new() { return sp::load_corpus(data_path("figure4.spn")).front(); }

/// The full parse of the fortune sentence, as drawn in kFortunePicture.
inline sp::Alignment fortune_parse() {
  return alignment_from_picture(read_picture(kFortunePicture, true), fortune_grammar());
}

/// The cost model build_alignments uses for `new_p` against `g`.
inline sp::CostModel model_for(const sp::Grammar& g, const sp::SPPattern& new_p) {
  return g.cost_model({&new_p, 1});
}

}  // namespace sp_test
