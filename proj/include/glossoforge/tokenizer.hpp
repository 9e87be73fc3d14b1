#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace glossoforge {

struct SymbolPairHash {
  std::size_t operator()(const std::pair<std::string, std::string>& p) const noexcept {
    const std::size_t h1 = std::hash<std::string>{}(p.first);
    const std::size_t h2 = std::hash<std::string>{}(p.second);
    return h1 ^ (h2 + 0x9e3779b97f4a7c15ULL + (h1 << 6) + (h1 >> 2));
  }
};

using SymbolPair = std::pair<std::string, std::string>;

// Ordered BPE merge rules. Immutable after loading; safe to share between
// threads.
class MergeTable {
 public:
  // Builds a table from rules in priority order. Throws InputError on
  // duplicates or empty symbols.
  explicit MergeTable(std::vector<SymbolPair> merges);

  const std::vector<SymbolPair>& merges() const noexcept { return merges_; }
  std::size_t size() const noexcept { return merges_.size(); }

  std::optional<std::size_t> rank(const std::string& left, const std::string& right) const;

  // Suffix the rules attach to a word-final symbol ("</w>" for CLIP-style
  // tables), or empty when the rules carry no marker.
  const std::string& end_of_word_marker() const noexcept { return marker_; }

  // True when symbols are spelled with the GPT-2 byte-to-unicode alphabet,
  // in which case every input byte is representable.
  bool byte_level() const noexcept { return byte_level_; }

  // Characters (UTF-8) that may start a word segmentation for plain tables.
  bool in_alphabet(const std::string& symbol) const;

  // Copy keeping only the first `count` rules; alphabet, marker and byte mode carry over.
  MergeTable truncated(std::size_t count) const;

 private:
  std::vector<SymbolPair> merges_;
  std::unordered_map<SymbolPair, std::size_t, SymbolPairHash> ranks_;
  std::unordered_set<std::string> alphabet_;
  std::string marker_;
  bool byte_level_ = false;
};

// Reads a merge file: one "left right" pair per line, optional leading header
// ("#version: ..." or any line starting with '#'), blank lines ignored.
// Throws ParseError naming the offending line.
MergeTable load_merge_table(std::istream& in, const std::string& source_name = "<merges>");
MergeTable load_merge_table_file(const std::string& path);

struct TokenSegmentation {
  std::string word;                  // normalized (folded) word
  std::vector<std::string> tokens;   // folded token texts, marker stripped
  std::vector<std::size_t> boundaries;  // byte offsets of interior cuts in `word`
};

// Lowercases, folds diacritics and validates a single word.
std::string normalize_word(std::string_view word);

// Segments one word. For byte-level tables BPE runs on the lowercased,
// unfolded bytes (as the reference encoder does) and each token is then
// projected onto the folded word; plain tables segment the folded word
// directly.
TokenSegmentation segment(std::string_view word, const MergeTable& table);

struct SharedPrefixReport {
  TokenSegmentation first;
  TokenSegmentation second;
  std::vector<std::string> common;
  std::size_t length = 0;
};

SharedPrefixReport shared_prefix_report(std::string_view a, std::string_view b,
                                        const MergeTable& table);

namespace bpe_detail {
// Runs merges over an initial symbol sequence (the last symbol already carries
// the end-of-word marker, if any).
std::vector<std::string> apply_merges(std::vector<std::string> symbols, const MergeTable& table);

// GPT-2/CLIP reversible byte alphabet.
const std::string& byte_symbol(unsigned char b);
std::optional<unsigned char> symbol_byte(std::string_view symbol_utf8);
}  // namespace bpe_detail

}  // namespace glossoforge
