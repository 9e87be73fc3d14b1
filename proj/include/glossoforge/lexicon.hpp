#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace glossoforge {

struct Concept {
  std::string id;     // stable slug, e.g. "birds"
  std::string gloss;  // English pivot word

  auto operator<=>(const Concept&) const = default;
};

struct LexiconEntry {
  std::string concept_id;
  std::string language;    // ISO 639-1
  std::string surface;     // as written, diacritics kept
  std::string normalized;  // normalize_word(surface)

  bool operator==(const LexiconEntry&) const = default;
};

enum class LexiconFormat { tsv, json };

// Concept -> per-language words. Immutable after construction.
class Lexicon {
 public:
  Lexicon() = default;
  // Validates and normalizes. Throws InputError on duplicate
  // (concept, language) pairs, undeclared languages or empty fields.
  Lexicon(std::vector<Concept> concepts, std::vector<LexiconEntry> entries,
          std::vector<std::string> declared_languages);

  const std::vector<LexiconEntry>& entries() const noexcept { return entries_; }
  const std::vector<Concept>& concepts() const noexcept { return concepts_; }
  const std::set<std::string>& languages() const noexcept { return languages_; }
  // Languages in declaration order.
  const std::vector<std::string>& language_order() const noexcept { return language_order_; }

  const Concept& concept_by_id(std::string_view id) const;
  bool has_concept(std::string_view id) const;

  // Entry for (concept, language) or nullptr.
  const LexiconEntry* find(std::string_view concept_id, std::string_view language) const;

  // All entries of a concept, ordered by language code.
  std::vector<const LexiconEntry*> entries_for(std::string_view concept_id) const;

  // Index of an entry inside entries(); entries are stored sorted by
  // (concept, language).
  std::size_t index_of(const LexiconEntry& entry) const;

  // True if `word` equals the normalized form of any entry.
  bool contains_normalized(std::string_view word) const;

  std::string to_tsv() const;
  std::string to_json() const;

 private:
  std::vector<Concept> concepts_;
  std::vector<LexiconEntry> entries_;
  std::set<std::string> languages_;
  std::vector<std::string> language_order_;
  std::set<std::string> normalized_forms_;
};

// TSV: optional "# languages: de it fr es" header, optional column header
// row "concept<TAB>language<TAB>surface[<TAB>gloss]". JSON: either a list of
// {concept, language, surface[, gloss]} objects or an object with
// "languages" and "entries".
Lexicon load_lexicon(std::istream& in, LexiconFormat format,
                     const std::string& source_name = "<lexicon>");
Lexicon load_lexicon_file(const std::string& path);  // format from extension

// Entries of a concept in the requested languages, in the lexicon's declared
// language order (code order when none was declared).
std::vector<LexiconEntry> translations(const Lexicon& lexicon, std::string_view concept_id,
                                       const std::set<std::string>& languages);

bool is_iso639_1(std::string_view code);

}  // namespace glossoforge
