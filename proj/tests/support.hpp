#pragma once

#include <string>

#include "glossoforge/cli.hpp"
#include "glossoforge/lexicon.hpp"
#include "glossoforge/tokenizer.hpp"

namespace gf_test {

inline std::string data(const std::string& rel) { return glossoforge::cli::data_path(rel); }

inline const glossoforge::MergeTable& reference_table() {
  static const auto table = glossoforge::load_merge_table_file(data("merges/clip_bpe_merges.txt"));
  return table;
}

inline const glossoforge::Lexicon& fixture_lexicon() {
  static const auto lex = glossoforge::load_lexicon_file(data("lexicon.tsv"));
  return lex;
}

}  // namespace gf_test
