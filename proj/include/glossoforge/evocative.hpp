#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "glossoforge/random.hpp"

namespace glossoforge {

enum class SlotKind { stem, suffix, secondary_suffix, word_break };

std::string_view to_string(SlotKind slot);

struct SyllableInventory {
  std::vector<std::string> onsets;  // "" allowed for vowel-initial syllables
  std::vector<std::string> nuclei;
  std::vector<std::string> codas;
  unsigned coda_percent = 0;
  std::vector<std::string> joins;  // consonants closing a vowel-final stem before a vowel-initial suffix
  std::size_t min_syllables = 1;
  std::size_t max_syllables = 1;
};

// Domain morphology: slot layout, suffix inventories and the syllable model
// used to fill stem slots. Suffix surfaces may carry diacritics; the folded
// forms are lowercase ASCII.
struct MorphTemplate {
  std::string domain;  // "taxonomy", "pharma", "toponym:de", ...
  std::vector<SlotKind> slots;
  std::vector<std::string> suffix_inventory;
  std::vector<std::string> secondary_suffix_inventory;  // species epithets
  SyllableInventory syllables;

  void validate() const;  // throws InputError
};

struct MorphologyConfig {
  std::map<std::string, MorphTemplate> templates;
  std::map<std::string, std::vector<std::string>> seed_lists;  // domain -> surface terms

  const MorphTemplate& at(std::string_view domain) const;
  std::vector<std::string> domains() const;
};

// Reads morphology.json plus the seed-list files it references (paths
// relative to the JSON file).
MorphologyConfig load_morphology(const std::string& path);

struct EvocativePart {
  SlotKind slot = SlotKind::stem;
  std::string text;     // folded
  std::string surface;  // as drawn from the inventory
};

struct EvocativeCandidate {
  std::string text;     // folded; binomial words separated by one space
  std::string surface;  // with original diacritics
  std::string domain;
  std::vector<EvocativePart> parts;
  std::uint64_t seed = 0;
};

struct EvocativeParams {
  std::size_t count = 20;
  std::uint64_t seed = kDefaultSeed;
  std::vector<std::string> stems;  // taxonomy only; empty = syllable stems
  // Overrides for the template inventories; empty = template default.
  std::vector<std::string> suffixes;
  std::vector<std::string> secondary_suffixes;
};

// Builds a candidate from explicit slot fillers. Suffix parts must belong to
// the template's inventory (or the override given).
EvocativeCandidate assemble(const MorphTemplate& tmpl, const std::vector<EvocativePart>& parts,
                            std::uint64_t seed = 0);

// Words that generated candidates must never reproduce.
class LeakGuard {
 public:
  LeakGuard() = default;
  void add(std::string_view term);  // folded on insert; multi-word terms add each word too
  bool leaks(const EvocativeCandidate& c) const;
  std::size_t size() const { return forbidden_.size(); }

 private:
  std::unordered_set<std::string> forbidden_;
};

// Binomials "X Y". With stems, every (genus stem, genus suffix, species
// stem, species suffix) combination in inventory order; otherwise `count`
// seeded syllable binomials.
std::vector<EvocativeCandidate> generate_taxonomy(const MorphTemplate& tmpl,
                                                  const EvocativeParams& params,
                                                  const LeakGuard& guard = {});
std::vector<EvocativeCandidate> generate_pharma(const MorphTemplate& tmpl,
                                                const EvocativeParams& params,
                                                const LeakGuard& guard = {});
// `tmpl` must be the toponym template of the wanted language.
std::vector<EvocativeCandidate> generate_toponym(const MorphTemplate& tmpl,
                                                 const EvocativeParams& params,
                                                 const LeakGuard& guard = {});

// Dispatches on tmpl.domain.
std::vector<EvocativeCandidate> generate(const MorphTemplate& tmpl, const EvocativeParams& params,
                                         const LeakGuard& guard = {});

// Character n-gram (n = 2, 3) multinomial model with add-one smoothing and
// uniform class priors. Text is folded and padded with '^' and '$'.
class MorphologyClassifier {
 public:
  static MorphologyClassifier train(const std::map<std::string, std::vector<std::string>>& examples);

  // Posterior per domain; nonnegative and summing to 1.
  std::map<std::string, double> classify(std::string_view text) const;
  std::string argmax(std::string_view text) const;

  // Log-likelihood of `text` under one domain (unnormalized).
  double log_likelihood(std::string_view text, const std::string& domain) const;

  const std::vector<std::string>& domains() const { return domains_; }
  std::size_t vocabulary_size() const { return vocabulary_.size(); }

 private:
  std::vector<std::string> domains_;
  std::map<std::string, std::map<std::string, std::size_t>> counts_;
  std::map<std::string, std::size_t> totals_;
  std::unordered_set<std::string> vocabulary_;
};

// n-grams (n = 2 and 3, over code points) of the folded, padded text.
std::vector<std::string> morphology_ngrams(std::string_view text);

}  // namespace glossoforge
