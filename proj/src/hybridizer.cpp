#include "glossoforge/hybridizer.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <map>
#include <unordered_set>

#include <json.hpp>

#include "glossoforge/error.hpp"

namespace glossoforge {
namespace {

constexpr std::size_t kMaxLanguages = 16;
constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return a > kSaturated - b ? kSaturated : a + b;
}

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  return a > kSaturated / b ? kSaturated : a * b;
}

struct InventoryChunk {
  std::size_t word = 0;  // index into ChunkSpace::words
  Span span;
};

// Chunk inventory of one concept plus the counting table over
// (remaining length, remaining chunks, language mask).
class ChunkSpace {
 public:
  ChunkSpace(const Lexicon& lexicon, std::string_view concept_id, const HybridParams& params,
             const MergeTable* table)
      : params_(params) {
    params_.validate();
    const auto all = lexicon.entries_for(concept_id);
    if (all.empty()) throw InputError("unknown concept \"" + std::string(concept_id) + "\"");
    if (params_.languages.empty()) {
      for (const auto* e : all) words_.push_back(*e);
    } else {
      for (const auto& lang : params_.languages) {
        const auto* e = lexicon.find(concept_id, lang);
        if (e == nullptr) {
          throw InputError("concept \"" + std::string(concept_id) + "\" has no \"" + lang +
                           "\" translation");
        }
        words_.push_back(*e);
      }
      std::sort(words_.begin(), words_.end(),
                [](const LexiconEntry& a, const LexiconEntry& b) { return a.language < b.language; });
    }
    if (words_.size() > kMaxLanguages) throw InputError("too many languages for one concept");

    for (std::size_t w = 0; w < words_.size(); ++w) {
      const auto& word = words_[w].normalized;
      std::vector<std::size_t> cuts;
      if (params_.mode == ChunkMode::token_aligned) {
        if (table == nullptr) throw InputError("token-aligned mode needs a merge table");
        const auto seg = segment(words_[w].surface, *table);
        if (seg.word != word) throw InputError("segmentation of " + words_[w].surface + " drifted");
        cuts.push_back(0);
        cuts.insert(cuts.end(), seg.boundaries.begin(), seg.boundaries.end());
        cuts.push_back(word.size());
      } else {
        for (std::size_t i = 0; i <= word.size(); ++i) cuts.push_back(i);
      }
      for (std::size_t a = 0; a < cuts.size(); ++a) {
        for (std::size_t b = a + 1; b < cuts.size(); ++b) {
          const std::size_t len = cuts[b] - cuts[a];
          if (len >= params_.min_chunk_len && len <= params_.max_len) {
            inventory_.push_back({w, {cuts[a], cuts[b]}});
          }
        }
      }
    }

    const std::size_t masks = std::size_t{1} << words_.size();
    stride_k_ = masks;
    stride_b_ = (params_.max_chunks + 1) * masks;
    memo_.assign((params_.max_len + 1) * stride_b_, kUnknown);
    by_lang_len_.assign(words_.size(), std::vector<std::uint64_t>(params_.max_len + 1, 0));
    for (const auto& c : inventory_) ++by_lang_len_[c.word][c.span.size()];
  }

  const std::vector<LexiconEntry>& words() const { return words_; }
  const std::vector<InventoryChunk>& inventory() const { return inventory_; }
  const HybridParams& params() const { return params_; }

  bool enough_languages(std::uint32_t mask) const {
    return static_cast<std::size_t>(std::popcount(mask)) >= params_.min_languages;
  }

  // Number of completions (the empty one included when the mask already
  // qualifies) within `budget` bytes and `chunks` more chunks.
  std::uint64_t completions(std::size_t budget, std::size_t chunks, std::uint32_t mask) {
    auto& slot = memo_[budget * stride_b_ + chunks * stride_k_ + mask];
    if (slot != kUnknown) return slot;
    std::uint64_t total = enough_languages(mask) ? 1 : 0;
    if (chunks > 0) {
      for (std::size_t w = 0; w < words_.size(); ++w) {
        const std::uint32_t next = mask | (1u << w);
        for (std::size_t len = 1; len <= budget; ++len) {
          if (by_lang_len_[w][len] == 0) continue;
          total = sat_add(total, sat_mul(by_lang_len_[w][len], completions(budget - len, chunks - 1, next)));
        }
      }
    }
    slot = total;
    return total;
  }

  std::uint64_t raw_size() { return completions(params_.max_len, params_.max_chunks, 0); }

  // Chunk-index sequence at position `index` of the enumeration order.
  std::vector<std::size_t> unrank(std::uint64_t index) {
    std::vector<std::size_t> seq;
    std::size_t budget = params_.max_len;
    std::size_t chunks = params_.max_chunks;
    std::uint32_t mask = 0;
    while (true) {
      if (!seq.empty() && enough_languages(mask)) {
        if (index == 0) return seq;
        --index;
      }
      bool advanced = false;
      for (std::size_t c = 0; c < inventory_.size() && chunks > 0; ++c) {
        const auto& ch = inventory_[c];
        if (ch.span.size() > budget) continue;
        const std::uint32_t next = mask | (1u << ch.word);
        const std::uint64_t n = completions(budget - ch.span.size(), chunks - 1, next);
        if (index < n) {
          seq.push_back(c);
          budget -= ch.span.size();
          --chunks;
          mask = next;
          advanced = true;
          break;
        }
        index -= n;
      }
      if (!advanced) throw Error("enumeration index out of range");
    }
  }

  // Visits every sequence in enumeration order.
  template <typename Visit>
  void for_each(Visit&& visit) {
    std::vector<std::size_t> seq;
    walk(seq, params_.max_len, params_.max_chunks, 0, visit);
  }

  HybridCandidate materialize(const std::vector<std::size_t>& seq, std::string_view concept_id) const {
    HybridCandidate cand;
    cand.concept_id = std::string(concept_id);
    cand.params = params_;
    for (std::size_t idx : seq) {
      const auto& ic = inventory_[idx];
      const auto& src = words_[ic.word];
      Chunk chunk{src.language, src, ic.span,
                  src.normalized.substr(ic.span.begin, ic.span.size()), params_.mode,
                  ic.span.begin == 0};
      cand.text += chunk.text;
      cand.languages_covered.insert(chunk.language);
      cand.chunks.push_back(std::move(chunk));
    }
    return cand;
  }

  std::string text_of(const std::vector<std::size_t>& seq) const {
    std::string text;
    for (std::size_t idx : seq) {
      const auto& ic = inventory_[idx];
      text.append(words_[ic.word].normalized, ic.span.begin, ic.span.size());
    }
    return text;
  }

 private:
  static constexpr std::uint64_t kUnknown = kSaturated;

  template <typename Visit>
  void walk(std::vector<std::size_t>& seq, std::size_t budget, std::size_t chunks,
            std::uint32_t mask, Visit& visit) {
    if (!seq.empty() && enough_languages(mask)) visit(seq);
    if (chunks == 0) return;
    for (std::size_t c = 0; c < inventory_.size(); ++c) {
      const auto& ch = inventory_[c];
      if (ch.span.size() > budget) continue;
      const std::uint32_t next = mask | (1u << ch.word);
      if (completions(budget - ch.span.size(), chunks - 1, next) == 0) continue;
      seq.push_back(c);
      walk(seq, budget - ch.span.size(), chunks - 1, next, visit);
      seq.pop_back();
    }
  }

  HybridParams params_;
  std::vector<LexiconEntry> words_;
  std::vector<InventoryChunk> inventory_;
  std::vector<std::vector<std::uint64_t>> by_lang_len_;
  std::vector<std::uint64_t> memo_;
  std::size_t stride_k_ = 0;
  std::size_t stride_b_ = 0;
};

// Floyd's algorithm: `count` distinct values from [0, population), sorted.
std::vector<std::uint64_t> sample_positions(std::uint64_t population, std::size_t count,
                                            std::uint64_t seed) {
  SeededRng rng(seed);
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(count * 2);
  for (std::uint64_t j = population - count; j < population; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<HybridCandidate> enumerate(const Lexicon& lexicon, std::string_view concept_id,
                                       const HybridParams& params, const MergeTable* table) {
  ChunkSpace space(lexicon, concept_id, params, table);
  std::vector<HybridCandidate> out;
  std::unordered_set<std::string> seen;
  auto accept = [&](const std::vector<std::size_t>& seq) {
    std::string text = space.text_of(seq);
    if (lexicon.contains_normalized(text) || !seen.insert(text).second) return;
    out.push_back(space.materialize(seq, concept_id));
  };

  const std::uint64_t total = space.raw_size();
  if (total == 0) return out;
  if (total <= params.max_candidates) {
    space.for_each(accept);
  } else {
    for (std::uint64_t pos : sample_positions(total, params.max_candidates, params.seed)) {
      accept(space.unrank(pos));
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(ChunkMode mode) {
  return mode == ChunkMode::token_aligned ? "token" : "free";
}

ChunkMode parse_chunk_mode(std::string_view text) {
  if (text == "token" || text == "token_aligned") return ChunkMode::token_aligned;
  if (text == "free") return ChunkMode::free;
  throw InputError("unknown chunk mode \"" + std::string(text) + "\" (expected token|free)");
}

void HybridParams::validate() const {
  if (min_languages < 1) throw InputError("min_languages must be >= 1");
  if (min_chunk_len < 1) throw InputError("min_chunk_len must be >= 1");
  if (max_len < min_chunk_len) throw InputError("max_len must be >= min_chunk_len");
  if (max_len > 256) throw InputError("max_len must be <= 256");
  if (max_chunks > 64) throw InputError("max_chunks must be <= 64");
}

std::vector<HybridCandidate> enumerate_token_aligned(const Lexicon& lexicon,
                                                     std::string_view concept_id,
                                                     HybridParams params, const MergeTable& table) {
  params.mode = ChunkMode::token_aligned;
  return enumerate(lexicon, concept_id, params, &table);
}

std::vector<HybridCandidate> enumerate_free_chunks(const Lexicon& lexicon,
                                                   std::string_view concept_id,
                                                   HybridParams params) {
  params.mode = ChunkMode::free;
  return enumerate(lexicon, concept_id, params, nullptr);
}

std::uint64_t count_raw_space(const Lexicon& lexicon, std::string_view concept_id,
                              const HybridParams& params, const MergeTable* table) {
  ChunkSpace space(lexicon, concept_id, params, table);
  return space.raw_size();
}

std::optional<HybridCandidate> find_construction(std::string_view text, const Lexicon& lexicon,
                                                 std::string_view concept_id,
                                                 const HybridParams& params,
                                                 const MergeTable* table) {
  if (text.empty() || text.size() > params.max_len || lexicon.contains_normalized(text)) {
    return std::nullopt;
  }
  ChunkSpace space(lexicon, concept_id, params, table);
  const auto& inv = space.inventory();
  const auto& words = space.words();
  // Dead states: (position, chunks used, mask) known to have no completion.
  std::set<std::tuple<std::size_t, std::size_t, std::uint32_t>> dead;
  std::vector<std::size_t> seq;

  auto search = [&](auto&& self, std::size_t pos, std::uint32_t mask) -> bool {
    if (pos == text.size()) return !seq.empty() && space.enough_languages(mask);
    if (seq.size() == params.max_chunks) return false;
    const auto key = std::make_tuple(pos, seq.size(), mask);
    if (dead.contains(key)) return false;
    for (std::size_t c = 0; c < inv.size(); ++c) {
      const auto& ic = inv[c];
      const auto len = ic.span.size();
      if (pos + len > text.size()) continue;
      if (text.compare(pos, len, words[ic.word].normalized, ic.span.begin, len) != 0) continue;
      seq.push_back(c);
      if (self(self, pos + len, mask | (1u << ic.word))) return true;
      seq.pop_back();
    }
    dead.insert(key);
    return false;
  };
  if (!search(search, 0, 0)) return std::nullopt;
  return space.materialize(seq, concept_id);
}

bool provenance_sound(const HybridCandidate& candidate) {
  std::string rebuilt;
  for (const auto& c : candidate.chunks) {
    if (c.span.end > c.source.normalized.size() || c.span.begin >= c.span.end) return false;
    const std::string piece = c.source.normalized.substr(c.span.begin, c.span.size());
    if (piece != c.text || c.language != c.source.language) return false;
    rebuilt += piece;
  }
  return rebuilt == candidate.text;
}

std::vector<BlendCandidate> portmanteau(std::string_view a, std::string_view b,
                                        const BlendParams& params) {
  if (a.empty() || b.empty()) throw InputError("portmanteau needs two non-empty words");
  std::vector<BlendCandidate> out;
  std::unordered_set<std::string> seen;
  for (std::size_t p = std::max<std::size_t>(params.min_prefix, 1); p <= a.size(); ++p) {
    for (std::size_t s = std::max<std::size_t>(params.min_suffix, 1); s <= b.size(); ++s) {
      std::string text = std::string(a.substr(0, p)) + std::string(b.substr(b.size() - s));
      if (text == a || text == b || !seen.insert(text).second) continue;
      out.push_back({std::move(text), p, s});
    }
  }
  return out;
}

std::string compose_sentence(std::string_view template_text,
                             const std::vector<std::pair<std::string, std::string>>& bindings) {
  std::map<std::string, std::string> bound;
  for (const auto& [slot, value] : bindings) {
    if (!bound.emplace(slot, value).second) throw InputError("slot {" + slot + "} bound twice");
  }
  std::set<std::string> used;
  std::string out;
  for (std::size_t i = 0; i < template_text.size();) {
    const char ch = template_text[i];
    if (ch == '}') throw InputError("unmatched '}' at offset " + std::to_string(i));
    if (ch != '{') {
      out.push_back(ch);
      ++i;
      continue;
    }
    const auto close = template_text.find('}', i + 1);
    if (close == std::string_view::npos) throw InputError("unterminated placeholder at offset " + std::to_string(i));
    const std::string slot(template_text.substr(i + 1, close - i - 1));
    if (slot.empty() || slot.find('{') != std::string::npos) {
      throw InputError("malformed placeholder at offset " + std::to_string(i));
    }
    auto it = bound.find(slot);
    if (it == bound.end()) throw InputError("placeholder {" + slot + "} is unbound");
    out += it->second;
    used.insert(slot);
    i = close + 1;
  }
  for (const auto& [slot, value] : bound) {
    if (!used.contains(slot)) throw InputError("binding for {" + slot + "} matches no placeholder");
  }
  return out;
}

std::vector<RankedCandidate> rank_candidates(const std::vector<HybridCandidate>& candidates,
                                             const Lexicon& lexicon, const Scorer& scorer) {
  std::vector<RankedCandidate> ranked;
  ranked.reserve(candidates.size());
  for (const auto& cand : candidates) {
    RankedCandidate rc{cand, std::nullopt, {}};
    try {
      ScoreRequest req;
      req.candidate = cand.text;
      req.concept_gloss = lexicon.concept_by_id(cand.concept_id).gloss;
      for (const auto* e : lexicon.entries_for(cand.concept_id)) req.translations.push_back(e->normalized);
      rc.score = scorer.score(req);
    } catch (const Error& e) {
      rc.error = std::string(e.kind()) + ": " + e.what();
    }
    ranked.push_back(std::move(rc));
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedCandidate& x, const RankedCandidate& y) {
    if (x.score.has_value() != y.score.has_value()) return x.score.has_value();
    if (x.score && x.score->score != y.score->score) return x.score->score > y.score->score;
    return x.candidate.text < y.candidate.text;
  });
  return ranked;
}

std::string candidate_to_json(const HybridCandidate& candidate) {
  nlohmann::ordered_json j;
  j["text"] = candidate.text;
  j["concept"] = candidate.concept_id;
  j["languages"] = std::vector<std::string>(candidate.languages_covered.begin(),
                                            candidate.languages_covered.end());
  auto chunks = nlohmann::ordered_json::array();
  for (const auto& c : candidate.chunks) {
    chunks.push_back({{"text", c.text},
                      {"language", c.language},
                      {"source", c.source.surface},
                      {"source_normalized", c.source.normalized},
                      {"span", {c.span.begin, c.span.end}},
                      {"mode", to_string(c.mode)},
                      {"is_prefix", c.is_prefix}});
  }
  j["chunks"] = std::move(chunks);
  const auto& p = candidate.params;
  j["params"] = {{"mode", to_string(p.mode)},
                 {"min_languages", p.min_languages},
                 {"max_chunks", p.max_chunks},
                 {"min_chunk_len", p.min_chunk_len},
                 {"max_len", p.max_len},
                 {"max_candidates", p.max_candidates},
                 {"seed", p.seed},
                 {"languages", std::vector<std::string>(p.languages.begin(), p.languages.end())}};
  return j.dump();
}

}  // namespace glossoforge
