#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "glossoforge/lexicon.hpp"
#include "glossoforge/random.hpp"
#include "glossoforge/scoring.hpp"
#include "glossoforge/tokenizer.hpp"

namespace glossoforge {

enum class ChunkMode { token_aligned, free };

std::string_view to_string(ChunkMode mode);
ChunkMode parse_chunk_mode(std::string_view text);  // "token" | "free"

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
  auto operator<=>(const Span&) const = default;
};

struct Chunk {
  std::string language;
  LexiconEntry source;
  Span span;  // bytes of source.normalized
  std::string text;
  ChunkMode mode = ChunkMode::free;
  bool is_prefix = false;  // span starts at the word onset

  bool operator==(const Chunk&) const = default;
};

struct HybridParams {
  std::size_t min_languages = 2;
  std::size_t max_chunks = 5;
  std::size_t min_chunk_len = 2;
  std::size_t max_len = 25;
  ChunkMode mode = ChunkMode::free;
  std::size_t max_candidates = 1000;
  std::uint64_t seed = kDefaultSeed;
  std::set<std::string> languages;  // empty: every language the concept has

  void validate() const;  // throws InputError
};

struct HybridCandidate {
  std::string text;
  std::vector<Chunk> chunks;
  std::string concept_id;
  std::set<std::string> languages_covered;
  HybridParams params;
};

// Lowest-rank-first enumeration of chunk sequences. When the raw space is
// larger than params.max_candidates, a seeded uniform sample of positions in
// enumeration order is drawn instead; the output keeps enumeration order.
// Candidates are deduplicated by text and never equal a lexicon word.
std::vector<HybridCandidate> enumerate_token_aligned(const Lexicon& lexicon,
                                                     std::string_view concept_id,
                                                     HybridParams params, const MergeTable& table);
std::vector<HybridCandidate> enumerate_free_chunks(const Lexicon& lexicon,
                                                   std::string_view concept_id,
                                                   HybridParams params);

// Size of the raw (pre-deduplication) chunk-sequence space.
std::uint64_t count_raw_space(const Lexicon& lexicon, std::string_view concept_id,
                              const HybridParams& params, const MergeTable* table = nullptr);

// Decides whether `text` belongs to the candidate set defined by the bounds
// and returns the first construction in enumeration order. `table` is
// required for token-aligned mode.
std::optional<HybridCandidate> find_construction(std::string_view text, const Lexicon& lexicon,
                                                 std::string_view concept_id,
                                                 const HybridParams& params,
                                                 const MergeTable* table = nullptr);

// Re-extracts every chunk from its source word; true if they concatenate to
// candidate.text.
bool provenance_sound(const HybridCandidate& candidate);

struct BlendParams {
  std::size_t min_prefix = 2;
  std::size_t min_suffix = 3;
};

struct BlendCandidate {
  std::string text;
  std::size_t prefix_len = 0;  // taken from the first word
  std::size_t suffix_len = 0;  // taken from the second word
};

// prefix(a) + suffix(b), shortest prefix first, then shortest suffix.
std::vector<BlendCandidate> portmanteau(std::string_view a, std::string_view b,
                                        const BlendParams& params = {});

// Substitutes every "{slot}" in the template. Each slot may appear several
// times but must be bound exactly once; unused bindings are rejected too.
std::string compose_sentence(std::string_view template_text,
                             const std::vector<std::pair<std::string, std::string>>& bindings);

struct RankedCandidate {
  HybridCandidate candidate;
  std::optional<ScoreResult> score;
  std::string error;  // set when the scorer failed
};

// Stable descending by score, ties by text; failed candidates last.
std::vector<RankedCandidate> rank_candidates(const std::vector<HybridCandidate>& candidates,
                                             const Lexicon& lexicon, const Scorer& scorer);

// One JSON object per candidate (forge's JSONL line, without newline).
std::string candidate_to_json(const HybridCandidate& candidate);

}  // namespace glossoforge
