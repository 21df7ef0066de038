// Command-line front end: align, msa, learn, score.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sp/sp.hpp"

namespace {

constexpr int kFound = 0;
constexpr int kNone = 1;
constexpr int kInputError = 2;

std::string num(double v) {
  std::ostringstream ss;
  ss.precision(10);
  ss << v;
  return ss.str();
}

std::string joined(const std::vector<std::string>& toks) {
  std::string s;
  for (const auto& t : toks) s += (s.empty() ? "" : " ") + t;
  return s;
}

struct AlignOptions {
  std::string grammar, new_file, cost_model = "uniform";
  sp::SearchParams params;
  bool json = false;
};

void add_search_flags(CLI::App* cmd, AlignOptions& o) {
  cmd->add_option("--grammar", o.grammar, "grammar file")->required();
  cmd->add_option("--new", o.new_file, "file of New patterns, one per line")->required();
}

int run_align(const AlignOptions& o, bool render) {
  const auto kind = sp::parse_cost_model_kind(o.cost_model);
  std::vector<std::string> warnings;
  auto g = sp::load_grammar(o.grammar, &warnings, kind);
  for (const auto& w : warnings) std::cerr << o.grammar << ": warning: " << w << "\n";
  const auto corpus = sp::load_corpus(o.new_file);
  if (corpus.empty()) throw sp::Error(o.new_file + ": no New pattern");

  bool any = false;
  sp::Json doc = sp::Json::array();
  for (const auto& new_p : corpus) {
    const auto results = sp::build_alignments(new_p, g, o.params);
    any = any || !results.empty();
    if (o.json) {
      sp::Json entry;
      entry["new"] = new_p.symbols;
      entry["alignments"] = sp::Json::array();
      for (const auto& r : results)
        entry["alignments"].push_back(sp::export_alignment(r.alignment, r.result));
      doc.push_back(std::move(entry));
      continue;
    }
    std::cout << "New: " << joined(new_p.symbols) << "\n";
    if (results.empty()) std::cout << "no alignment with cd > 0\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i].result;
      std::cout << "\n#" << i + 1 << "  cd = " << num(r.cd) << "  b_new = " << num(r.b_new)
                << "  b_code = " << num(r.b_code) << "  p = " << num(r.probability.value_or(0))
                << "\n";
      std::cout << "code: " << joined(r.code) << "\n";
      if (render) std::cout << "\n" << sp::render_alignment(results[i].alignment);
    }
    std::cout << "\n";
  }
  if (o.json) std::cout << doc.dump(2) << "\n";
  return any ? kFound : kNone;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SP alignment engine"};
  app.require_subcommand(1);

  AlignOptions align;
  auto* align_cmd = app.add_subcommand("align", "build and render alignments of New patterns");
  add_search_flags(align_cmd, align);
  align_cmd->add_option("--beam", align.params.beam_width, "beam width")->check(CLI::PositiveNumber);
  align_cmd->add_option("--max-stages", align.params.max_stages, "stage limit")->check(CLI::PositiveNumber);
  align_cmd->add_option("--top", align.params.top_k, "alignments to report")->check(CLI::PositiveNumber);
  align_cmd->add_option("--cost-model", align.cost_model, "uniform or frequency")
      ->check(CLI::IsMember({"uniform", "frequency"}));
  align_cmd->add_flag("--json", align.json, "JSON output");

  AlignOptions score;
  auto* score_cmd = app.add_subcommand("score", "print scores of the top alignments");
  add_search_flags(score_cmd, score);

  std::string msa_file;
  sp::SearchParams msa_params;
  bool msa_json = false;
  auto* msa_cmd = app.add_subcommand("msa", "multiple alignment of plain sequences");
  msa_cmd->add_option("--patterns", msa_file, "file of sequences, one per line")->required();
  msa_cmd->add_option("--beam", msa_params.beam_width, "beam width")->check(CLI::PositiveNumber);
  msa_cmd->add_flag("--json", msa_json, "JSON output");

  std::string corpus_file, out_file, learn_cost = "uniform";
  sp::LearnParams learn_params;
  auto* learn_cmd = app.add_subcommand("learn", "learn a grammar from a corpus");
  learn_cmd->add_option("--corpus", corpus_file, "corpus file")->required();
  learn_cmd->add_option("--out", out_file, "grammar file to write")->required();
  learn_cmd->add_option("--grammar-beam", learn_params.grammar_beam, "grammars kept")
      ->check(CLI::PositiveNumber);
  learn_cmd->add_option("--passes", learn_params.max_passes, "passes over the corpus")
      ->check(CLI::PositiveNumber);
  learn_cmd->add_option("--seed", learn_params.id_seed, "first fresh class number");
  learn_cmd->add_option("--cost-model", learn_cost, "uniform or frequency")
      ->check(CLI::IsMember({"uniform", "frequency"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kInputError;
  }

  try {
    if (*align_cmd) return run_align(align, true);
    if (*score_cmd) return run_align(score, false);

    if (*msa_cmd) {
      const auto corpus = sp::load_corpus(msa_file);
      std::vector<std::vector<std::string>> seqs;
      for (const auto& p : corpus) seqs.push_back(p.symbols);
      const auto res = sp::msa_build(seqs, msa_params);
      if (msa_json) {
        sp::Json doc;
        doc["sequences"] = seqs;
        sp::Json cols = sp::Json::array();
        for (const auto& col : res.alignment.columns) {
          sp::Json cell = sp::Json::object();
          for (std::size_t r = 0; r < col.size(); ++r)
            if (col[r] != sp::kNoSymbol) cell[std::to_string(r)] = col[r];
          cols.push_back(std::move(cell));
        }
        doc["columns"] = std::move(cols);
        doc["saving"] = res.saving;
        std::cout << doc.dump(2) << "\n";
      } else if (sp::is_legal(res.alignment)) {
        std::cout << sp::render_alignment(res.alignment) << "\nU = " << num(res.saving)
                  << " bits\n";
      } else {
        // Nothing shared: every column is a singleton.
        for (std::size_t r = 0; r < seqs.size(); ++r) std::cout << r << "  " << joined(seqs[r]) << "\n";
        std::cout << "\nno shared symbols\nU = " << num(res.saving) << " bits\n";
      }
      return kFound;
    }

    if (*learn_cmd) {
      learn_params.cost_kind = sp::parse_cost_model_kind(learn_cost);
      const auto corpus = sp::load_corpus(corpus_file);
      const auto res = sp::learn(corpus, learn_params);
      const auto& best = res.grammars.front();
      sp::save_grammar(best.grammar, out_file);
      const auto base = sp::baseline_grammar(corpus, learn_params);
      std::cout << "T = " << num(best.t) << "\nG = " << num(best.g) << "\nE = " << num(best.e)
                << "\nbaseline T = " << num(base.t) << "\n";
      return kFound;
    }
  } catch (const sp::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const sp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
