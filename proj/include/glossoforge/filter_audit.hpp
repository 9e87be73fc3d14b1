#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "glossoforge/hybridizer.hpp"
#include "glossoforge/lexicon.hpp"

namespace glossoforge {

enum class BlacklistMode { exact_token, substring };

std::string_view to_string(BlacklistMode mode);
BlacklistMode parse_blacklist_mode(std::string_view text);  // "exact" | "substring"

struct Blacklist {
  std::set<std::string> terms;  // normalized
  BlacklistMode mode = BlacklistMode::exact_token;

  // Normalizes and validates (non-empty). Throws InputError.
  static Blacklist from_terms(const std::vector<std::string>& raw, BlacklistMode mode);
};

struct WhitelistVocabulary {
  std::set<std::string> words;  // normalized
  std::set<std::string> languages;

  static WhitelistVocabulary from_words(const std::vector<std::string>& raw,
                                        std::set<std::string> languages);
  void merge(const WhitelistVocabulary& other);
};

// One term per line, '#' comments; a "# language: xx" comment names the
// language of a whitelist file.
Blacklist load_blacklist(std::istream& in, BlacklistMode mode);
Blacklist load_blacklist_file(const std::string& path, BlacklistMode mode);
WhitelistVocabulary load_whitelist(std::istream& in);
WhitelistVocabulary load_whitelist_file(const std::string& path);

struct FilterVerdict {
  bool passed = true;
  std::vector<std::string> reasons;  // matched terms or OOV tokens, prompt order
};

// Prompt tokens: whitespace split, edge punctuation stripped, folded.
std::vector<std::string> prompt_tokens(std::string_view prompt);

FilterVerdict blacklist_filter(std::string_view prompt, const Blacklist& bl);
FilterVerdict whitelist_filter(std::string_view prompt, const WhitelistVocabulary& wl);

struct DecompositionPiece {
  Span span;  // in the nonce
  std::size_t entry = 0;  // index into Lexicon::entries()
  std::size_t source_begin = 0;  // offset inside the entry's normalized form
  std::string text;
  std::string concept_id;
  std::string source;  // entry's normalized word

  auto key() const { return std::make_tuple(span.begin, span.end, entry, source_begin); }
};

struct Decomposition {
  std::string nonce;
  std::vector<DecompositionPiece> pieces;
  std::size_t covered = 0;        // bytes explained by pieces
  std::size_t modal_covered = 0;  // bytes explained by the modal concept
  double coverage = 0.0;
  double coherence = 0.0;
  std::string modal_concept;
};

// Fills covered/modal/coverage/coherence from the pieces. Ties for the modal
// concept go to the smallest concept id.
void finalize(Decomposition& d);

// Ranking: higher coverage, then higher coherence, then fewer pieces, then
// lexicographically smaller piece keys. Returns true if a ranks before b.
bool ranks_before(const Decomposition& a, const Decomposition& b);

struct DecodeParams {
  std::size_t min_piece_len = 3;
  std::size_t top_k = 5;
};

// Segments the nonce into substrings of lexicon words (gaps allowed). The
// first result is the optimum under ranks_before; the rest are the best
// readings under each other concept, ranked. Empty if nothing matches.
std::vector<Decomposition> recovery_decode(std::string_view nonce, const Lexicon& lexicon,
                                           const DecodeParams& params = {});

struct AuditCandidate {
  std::string text;
  std::string concept_id;  // generating concept, may be empty
};

struct AuditRow {
  std::string text;
  std::string concept_id;
  FilterVerdict blacklist;
  FilterVerdict whitelist;
  std::optional<Decomposition> top;
  std::string recovered;  // empty when nothing was recovered
  std::string error;
};

struct AuditAggregate {
  std::size_t rows = 0;
  double blacklist_evasion_rate = 0.0;
  double whitelist_evasion_rate = 0.0;
  double recovery_rate = 0.0;  // recovered == generating concept (or any, if unknown)

  bool operator==(const AuditAggregate&) const = default;
};

struct EvasionReport {
  static constexpr int kSchemaVersion = 1;
  std::vector<AuditRow> rows;
  AuditAggregate aggregate;
  std::string blacklist_mode;
};

AuditAggregate aggregate_rows(const std::vector<AuditRow>& rows);

// Rows keep input order regardless of `threads`.
EvasionReport audit_run(const std::vector<AuditCandidate>& candidates, const Blacklist& bl,
                        const WhitelistVocabulary& wl, const Lexicon& lexicon,
                        const DecodeParams& decode = {}, unsigned threads = 0);

std::string report_to_json(const EvasionReport& report);
EvasionReport report_from_json(std::string_view json);

// Reads candidate JSONL as produced by forge/evoke ("text" required,
// "concept" optional).
std::vector<AuditCandidate> load_candidates_jsonl(std::istream& in, const std::string& source = "<candidates>");

}  // namespace glossoforge
