#include "glossoforge/tokenizer.hpp"

#include <array>
#include <fstream>
#include <limits>
#include <sstream>

#include "glossoforge/error.hpp"
#include "glossoforge/unicode.hpp"

namespace glossoforge {
namespace {

constexpr std::string_view kClipMarker = "</w>";

std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

// Printable bytes map to themselves; the rest are shifted to U+0100 upward.
struct ByteAlphabet {
  std::array<std::string, 256> symbols;
  std::unordered_map<std::string, unsigned char> reverse;

  ByteAlphabet() {
    std::array<bool, 256> printable{};
    for (int b = '!'; b <= '~'; ++b) printable[b] = true;
    for (int b = 0xA1; b <= 0xAC; ++b) printable[b] = true;
    for (int b = 0xAE; b <= 0xFF; ++b) printable[b] = true;
    char32_t next = 0x100;
    for (int b = 0; b < 256; ++b) {
      const char32_t cp = printable[b] ? static_cast<char32_t>(b) : next++;
      symbols[b] = encode_utf8(cp);
      reverse.emplace(symbols[b], static_cast<unsigned char>(b));
    }
  }
};

const ByteAlphabet& byte_alphabet() {
  static const ByteAlphabet alphabet;
  return alphabet;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.ends_with(suffix);
}

std::string strip_marker(std::string_view s, std::string_view marker) {
  if (!marker.empty() && ends_with(s, marker)) s.remove_suffix(marker.size());
  return std::string(s);
}

// Code points U+0100..U+0143 only appear in byte-remapped alphabets.
bool has_remapped_byte_symbol(std::string_view s) {
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const auto lead = static_cast<unsigned char>(s[i]);
    const auto cont = static_cast<unsigned char>(s[i + 1]);
    if (lead == 0xC4 && cont >= 0x80 && cont <= 0xBF) return true;  // U+0100..U+013F
    if (lead == 0xC5 && cont >= 0x80 && cont <= 0x83) return true;  // U+0140..U+0143
  }
  return false;
}

void validate_word(std::string_view word) {
  if (word.empty()) throw InputError("empty word");
  if (unicode::split_whitespace(word).size() != 1 ||
      unicode::split_whitespace(word).front().size() != word.size()) {
    throw InputError("word contains whitespace: \"" + std::string(word) + "\"");
  }
}

std::vector<std::size_t> boundaries_of(const std::vector<std::string>& tokens) {
  std::vector<std::size_t> cuts;
  std::size_t offset = 0;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    offset += tokens[i].size();
    cuts.push_back(offset);
  }
  return cuts;
}

}  // namespace

MergeTable::MergeTable(std::vector<SymbolPair> merges) : merges_(std::move(merges)) {
  if (merges_.empty()) throw InputError("merge table has no rules");
  ranks_.reserve(merges_.size());
  bool any_marker = false;
  for (std::size_t r = 0; r < merges_.size(); ++r) {
    const auto& [left, right] = merges_[r];
    if (left.empty() || right.empty()) {
      throw InputError("merge rule " + std::to_string(r) + " has an empty symbol");
    }
    if (!ranks_.emplace(merges_[r], r).second) {
      throw InputError("duplicate merge rule \"" + left + " " + right + "\" at rank " +
                       std::to_string(r) + " (first at rank " +
                       std::to_string(ranks_.at(merges_[r])) + ")");
    }
    if (ends_with(left, kClipMarker) || ends_with(right, kClipMarker)) any_marker = true;
    if (has_remapped_byte_symbol(left) || has_remapped_byte_symbol(right)) byte_level_ = true;
  }
  if (any_marker) marker_ = std::string(kClipMarker);
  for (const auto& [left, right] : merges_) {
    for (const auto* sym : {&left, &right}) {
      for (auto& cp : unicode::code_points(strip_marker(*sym, marker_))) {
        alphabet_.insert(std::move(cp));
      }
    }
  }
}

std::optional<std::size_t> MergeTable::rank(const std::string& left, const std::string& right) const {
  auto it = ranks_.find(SymbolPair{left, right});
  if (it == ranks_.end()) return std::nullopt;
  return it->second;
}

bool MergeTable::in_alphabet(const std::string& symbol) const {
  return alphabet_.contains(symbol);
}

MergeTable MergeTable::truncated(std::size_t count) const {
  if (count > merges_.size()) count = merges_.size();
  MergeTable out(std::vector<SymbolPair>(merges_.begin(), merges_.begin() + count));
  out.byte_level_ = byte_level_;
  out.marker_ = marker_;
  out.alphabet_ = alphabet_;
  return out;
}

MergeTable load_merge_table(std::istream& in, const std::string& source_name) {
  std::vector<SymbolPair> merges;
  std::vector<std::size_t> line_of_rank;
  std::unordered_map<SymbolPair, std::size_t, SymbolPairHash> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && (line.starts_with('#') || line.find("#version") != std::string::npos)) {
      continue;
    }
    std::istringstream fields(line);
    std::vector<std::string> parts;
    for (std::string p; fields >> p;) parts.push_back(std::move(p));
    if (parts.empty()) continue;
    if (parts.size() != 2) {
      throw ParseError(source_name, line_no,
                       "expected 2 symbols, found " + std::to_string(parts.size()) + ": \"" +
                           line + "\"");
    }
    SymbolPair pair{std::move(parts[0]), std::move(parts[1])};
    if (auto [it, inserted] = seen.emplace(pair, line_no); !inserted) {
      throw ParseError(source_name, line_no,
                       "duplicate merge rule (first seen on line " + std::to_string(it->second) +
                           ")");
    }
    merges.push_back(std::move(pair));
  }
  if (merges.empty()) throw ParseError(source_name, line_no, "no merge rules found");
  return MergeTable(std::move(merges));
}

MergeTable load_merge_table_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open merge table: " + path);
  return load_merge_table(in, path);
}

std::string normalize_word(std::string_view word) {
  validate_word(word);
  std::string out = unicode::fold(word);
  if (out.empty()) throw InputError("word normalizes to an empty string");
  return out;
}

namespace bpe_detail {

std::vector<std::string> apply_merges(std::vector<std::string> word, const MergeTable& table) {
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  while (word.size() > 1) {
    std::size_t best = kNone;
    std::size_t best_at = 0;
    for (std::size_t i = 0; i + 1 < word.size(); ++i) {
      if (auto r = table.rank(word[i], word[i + 1]); r && *r < best) {
        best = *r;
        best_at = i;
      }
    }
    if (best == kNone) break;
    const std::string left = word[best_at];
    const std::string right = word[best_at + 1];
    std::vector<std::string> merged;
    merged.reserve(word.size());
    for (std::size_t i = 0; i < word.size();) {
      if (i + 1 < word.size() && word[i] == left && word[i + 1] == right) {
        merged.push_back(left + right);
        i += 2;
      } else {
        merged.push_back(std::move(word[i]));
        ++i;
      }
    }
    word = std::move(merged);
  }
  return word;
}

const std::string& byte_symbol(unsigned char b) { return byte_alphabet().symbols[b]; }

std::optional<unsigned char> symbol_byte(std::string_view symbol_utf8) {
  const auto& rev = byte_alphabet().reverse;
  auto it = rev.find(std::string(symbol_utf8));
  if (it == rev.end()) return std::nullopt;
  return it->second;
}

}  // namespace bpe_detail

TokenSegmentation segment(std::string_view word, const MergeTable& table) {
  TokenSegmentation seg;
  seg.word = normalize_word(word);
  const std::string& marker = table.end_of_word_marker();

  if (!table.byte_level()) {
    std::vector<std::string> symbols = unicode::code_points(seg.word);
    for (const auto& s : symbols) {
      if (!table.in_alphabet(s)) {
        throw InputError("character '" + s + "' in \"" + std::string(word) +
                         "\" is outside the merge table alphabet");
      }
    }
    symbols.back() += marker;
    for (auto& t : bpe_detail::apply_merges(std::move(symbols), table)) {
      seg.tokens.push_back(strip_marker(t, marker));
    }
    seg.boundaries = boundaries_of(seg.tokens);
    return seg;
  }

  const std::string lowered = unicode::lower(word);
  std::vector<std::string> symbols;
  symbols.reserve(lowered.size());
  for (unsigned char b : lowered) symbols.push_back(bpe_detail::byte_symbol(b));
  symbols.back() += marker;
  const auto merged = bpe_detail::apply_merges(std::move(symbols), table);

  // Byte length of each token: one code point per byte symbol.
  std::vector<std::size_t> token_end;
  std::size_t offset = 0;
  for (const auto& t : merged) {
    offset += unicode::code_points(strip_marker(t, marker)).size();
    token_end.push_back(offset);
  }

  // Each source character's fold goes to the token holding its first byte.
  std::vector<std::string> projected(merged.size());
  std::size_t byte = 0;
  std::size_t tok = 0;
  for (const auto& cp : unicode::code_points(lowered)) {
    while (tok + 1 < token_end.size() && byte >= token_end[tok]) ++tok;
    projected[tok] += unicode::fold(cp);
    byte += cp.size();
  }
  for (auto& t : projected) {
    if (!t.empty()) seg.tokens.push_back(std::move(t));
  }
  seg.boundaries = boundaries_of(seg.tokens);
  return seg;
}

SharedPrefixReport shared_prefix_report(std::string_view a, std::string_view b,
                                        const MergeTable& table) {
  SharedPrefixReport report{segment(a, table), segment(b, table), {}, 0};
  const auto& ta = report.first.tokens;
  const auto& tb = report.second.tokens;
  while (report.length < ta.size() && report.length < tb.size() &&
         ta[report.length] == tb[report.length]) {
    report.common.push_back(ta[report.length]);
    ++report.length;
  }
  return report;
}

}  // namespace glossoforge
