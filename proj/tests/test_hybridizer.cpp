#include <gtest/gtest.h>

#include <map>
#include <set>

#include "glossoforge/error.hpp"
#include "glossoforge/hybridizer.hpp"
#include "support.hpp"

using namespace glossoforge;

namespace {

const std::map<std::string, std::vector<std::string>>& published_hybrids() {
  static const std::map<std::string, std::vector<std::string>> m{
      {"birds", {"uccoisegeljaros", "voiscellpajaraux", "oisvogajaro"}},
      {"bugs", {"insekafetti"}},
      {"butterfly", {"farpapmaripterling", "maripofarterling"}},
      {"lizard", {"eidelucertlagarzard"}},
      {"rabbit", {"coniglapkaninc"}},
      {"cliff", {"falaiscoglieklippantilado"}},
      {"plane", {"avflugzereo"}},
      {"firefighter", {"feuerpompbomber"}},
      {"education", {"educbildacion"}},
      {"exasperation", {"exaspenttausacion"}},
  };
  return m;
}

std::set<std::string> texts(const std::vector<HybridCandidate>& cs) {
  std::set<std::string> out;
  for (const auto& c : cs) out.insert(c.text);
  return out;
}

struct Piece {
  std::string language;
  std::string text;
};

// Chunks of one word: token runs (token mode) or substrings (free mode).
std::vector<Piece> pieces_of(const LexiconEntry& e, bool token_mode, std::size_t min_len) {
  std::vector<std::size_t> cuts{0};
  if (token_mode) {
    const auto seg = segment(e.surface, gf_test::reference_table());
    std::size_t at = 0;
    for (const auto& t : seg.tokens) cuts.push_back(at += t.size());
  } else {
    for (std::size_t i = 1; i <= e.normalized.size(); ++i) cuts.push_back(i);
  }
  std::vector<Piece> out;
  for (std::size_t a = 0; a < cuts.size(); ++a) {
    for (std::size_t b = a + 1; b < cuts.size(); ++b) {
      if (cuts[b] - cuts[a] >= min_len) out.push_back({e.language, e.normalized.substr(cuts[a], cuts[b] - cuts[a])});
    }
  }
  return out;
}

// Every one- and two-chunk sequence, filtered by the bounds.
std::set<std::string> brute_force_pairs(const std::string& concept_id, bool token_mode, const HybridParams& p) {
  const auto& lex = gf_test::fixture_lexicon();
  std::vector<Piece> all;
  for (const auto* e : lex.entries_for(concept_id)) {
    for (auto& pc : pieces_of(*e, token_mode, p.min_chunk_len)) all.push_back(pc);
  }
  std::set<std::string> out;
  auto keep = [&](const std::string& t, std::size_t langs) {
    if (langs >= p.min_languages && t.size() <= p.max_len && !lex.contains_normalized(t)) out.insert(t);
  };
  for (const auto& a : all) {
    keep(a.text, 1);
    if (p.max_chunks < 2) continue;
    for (const auto& b : all) keep(a.text + b.text, a.language == b.language ? 1 : 2);
  }
  return out;
}

// Sequences of at most two pieces before deduplication.
std::size_t brute_force_raw(const std::string& concept_id, bool token_mode, const HybridParams& p) {
  std::vector<Piece> all;
  for (const auto* e : gf_test::fixture_lexicon().entries_for(concept_id)) {
    for (auto& pc : pieces_of(*e, token_mode, p.min_chunk_len)) all.push_back(pc);
  }
  std::size_t n = 0;
  for (const auto& a : all) {
    n += p.min_languages <= 1 && a.text.size() <= p.max_len;
    if (p.max_chunks < 2) continue;
    for (const auto& b : all) {
      n += (a.language == b.language ? 1u : 2u) >= p.min_languages && a.text.size() + b.text.size() <= p.max_len;
    }
  }
  return n;
}

class FixedScorer final : public Scorer {
 public:
  explicit FixedScorer(std::map<std::string, double> scores) : scores_(std::move(scores)) {}
  ScoreResult score(const ScoreRequest& req) const override {
    auto it = scores_.find(req.candidate);
    if (it == scores_.end()) throw ScoringError("no score for " + req.candidate);
    return {it->second, "fixed", {}};
  }
  std::string id() const override { return "fixed"; }

 private:
  std::map<std::string, double> scores_;
};

HybridCandidate bare(const std::string& text) {
  HybridCandidate c;
  c.text = text;
  c.concept_id = "birds";
  return c;
}

}  // namespace

TEST(TokenAligned, ReferencePromptPresent) {
  HybridParams p;
  p.max_chunks = 4;
  p.min_chunk_len = 3;
  p.max_len = 15;
  p.max_candidates = 1'000'000;
  const auto out = enumerate_token_aligned(gf_test::fixture_lexicon(), "birds", p, gf_test::reference_table());
  const auto it = std::find_if(out.begin(), out.end(), [](const auto& c) { return c.text == "uccoisegeljaros"; });
  ASSERT_NE(it, out.end());
  EXPECT_TRUE(provenance_sound(*it));
  EXPECT_EQ(it->languages_covered.size(), 4u);

  const auto found = find_construction("uccoisegeljaros", gf_test::fixture_lexicon(), "birds",
                                       HybridParams{.mode = ChunkMode::token_aligned}, &gf_test::reference_table());
  ASSERT_TRUE(found.has_value());
  EXPECT_TRUE(provenance_sound(*found));
  for (const auto& c : found->chunks) EXPECT_EQ(c.mode, ChunkMode::token_aligned);
}

TEST(TokenAligned, WholeWordIsExcluded) {
  HybridParams p;
  p.min_languages = 1;
  p.max_chunks = 1;
  p.max_candidates = 100000;
  const auto out = texts(enumerate_token_aligned(gf_test::fixture_lexicon(), "birds", p, gf_test::reference_table()));
  EXPECT_FALSE(out.contains("vogel"));
  EXPECT_FALSE(out.contains("uccelli"));
  EXPECT_TRUE(out.contains("ucc"));
}

TEST(TokenAligned, PinnedCountMatchesBruteForce) {
  HybridParams p;
  p.max_chunks = 2;
  p.min_chunk_len = 3;
  p.min_languages = 2;
  p.max_candidates = 100000;
  const auto& lex = gf_test::fixture_lexicon();
  HybridParams tp = p;
  tp.mode = ChunkMode::token_aligned;
  EXPECT_EQ(count_raw_space(lex, "birds", tp, &gf_test::reference_table()), brute_force_raw("birds", true, p));
  EXPECT_EQ(count_raw_space(lex, "birds", tp, &gf_test::reference_table()), 210u);
  const auto out = enumerate_token_aligned(lex, "birds", p, gf_test::reference_table());
  const auto expect = brute_force_pairs("birds", true, p);
  EXPECT_EQ(texts(out), expect);
  EXPECT_EQ(out.size(), expect.size());
  EXPECT_EQ(out.size(), 210u);
}

TEST(TokenAligned, MissingLanguageIsAnError) {
  HybridParams p;
  p.languages = {"de", "pt"};
  EXPECT_THROW(enumerate_token_aligned(gf_test::fixture_lexicon(), "birds", p, gf_test::reference_table()),
               InputError);
  EXPECT_THROW(enumerate_free_chunks(gf_test::fixture_lexicon(), "dragons", HybridParams{}), InputError);
}

TEST(FreeChunks, TwoChunkSpaceMatchesBruteForce) {
  for (const auto& concept_id : {"birds", "rabbit", "plane"}) {
    HybridParams p;
    p.max_chunks = 2;
    p.min_chunk_len = 3;
    p.max_len = 12;
    p.max_candidates = 1'000'000;
    EXPECT_EQ(texts(enumerate_free_chunks(gf_test::fixture_lexicon(), concept_id, p)),
              brute_force_pairs(concept_id, false, p))
        << concept_id;
  }
}

TEST(FreeChunks, PublishedExamplesConstructible) {
  const auto& lex = gf_test::fixture_lexicon();
  for (const auto& [concept_id, strings] : published_hybrids()) {
    for (const auto& s : strings) {
      const auto c = find_construction(s, lex, concept_id, HybridParams{});
      ASSERT_TRUE(c.has_value()) << s;
      EXPECT_EQ(c->text, s);
      EXPECT_TRUE(provenance_sound(*c)) << s;
      EXPECT_GE(c->languages_covered.size(), 2u) << s;
      EXPECT_LE(c->chunks.size(), 5u) << s;
    }
  }
  // a split with a one-letter chunk
  HybridParams loose;
  loose.min_chunk_len = 1;
  EXPECT_TRUE(find_construction("voiscellpajaraux", lex, "birds", loose).has_value());
}

TEST(FreeChunks, ForeignStringsAreNotMembers) {
  const auto& lex = gf_test::fixture_lexicon();
  EXPECT_FALSE(find_construction("uccoisegeljaros", lex, "lizard", HybridParams{}).has_value());
  EXPECT_FALSE(find_construction("vogel", lex, "birds", HybridParams{}).has_value());
  EXPECT_FALSE(find_construction("zzzz", lex, "birds", HybridParams{}).has_value());
  HybridParams single;
  single.min_languages = 3;
  EXPECT_TRUE(find_construction("niglapkanin", lex, "rabbit", single).has_value());
  single.min_languages = 4;
  EXPECT_FALSE(find_construction("niglapkanin", lex, "rabbit", single).has_value());
}

TEST(FreeChunks, MembershipAgreesWithEnumeration) {
  const auto& lex = gf_test::fixture_lexicon();
  HybridParams p;
  p.max_chunks = 3;
  p.min_chunk_len = 3;
  p.max_len = 11;
  p.max_candidates = 10'000'000;
  for (const auto& concept_id : {"rabbit", "plane"}) {
    const auto members = texts(enumerate_free_chunks(lex, concept_id, p));
    ASSERT_FALSE(members.empty());
    for (const auto& t : members) ASSERT_TRUE(find_construction(t, lex, concept_id, p).has_value()) << t;
    // Probe with strings made of chunks that may break one bound or another.
    std::vector<std::string> chunks;
    for (const auto* e : lex.entries_for(concept_id)) {
      for (const auto& pc : pieces_of(*e, false, 2)) chunks.push_back(pc.text);
    }
    std::size_t probes = 0;
    for (std::size_t i = 0; i < chunks.size(); i += 3) {
      for (std::size_t j = 0; j < chunks.size(); j += 5) {
        const auto s = chunks[i] + chunks[j];
        EXPECT_EQ(find_construction(s, lex, concept_id, p).has_value(), members.contains(s)) << s;
        ++probes;
      }
    }
    EXPECT_GT(probes, 100u);
  }
}

TEST(FreeChunks, UnsatisfiableBoundsGiveEmpty) {
  HybridParams p;
  p.min_chunk_len = 14;
  p.max_len = 25;
  EXPECT_TRUE(enumerate_free_chunks(gf_test::fixture_lexicon(), "butterfly", p).empty());
  EXPECT_EQ(count_raw_space(gf_test::fixture_lexicon(), "butterfly", p), 0u);
}

TEST(Hybridizer, InvariantsOnSampledOutput) {
  const auto& lex = gf_test::fixture_lexicon();
  for (const auto& c : lex.concepts()) {
    HybridParams p;
    p.max_candidates = 300;
    const auto free = enumerate_free_chunks(lex, c.id, p);
    EXPECT_EQ(free.size(), texts(free).size());
    EXPECT_LE(free.size(), 300u);
    EXPECT_GT(free.size(), 250u);
    for (const auto& h : free) {
      EXPECT_TRUE(provenance_sound(h)) << h.text;
      EXPECT_GE(h.languages_covered.size(), p.min_languages);
      EXPECT_LE(h.text.size(), p.max_len);
      EXPECT_LE(h.chunks.size(), p.max_chunks);
      EXPECT_FALSE(lex.contains_normalized(h.text));
      for (const auto& ch : h.chunks) {
        EXPECT_GE(ch.text.size(), p.min_chunk_len);
        EXPECT_EQ(ch.is_prefix, ch.span.begin == 0);
      }
    }
  }
}

TEST(Hybridizer, SampledCandidatesAreMembers) {
  const auto& lex = gf_test::fixture_lexicon();
  HybridParams p;
  p.max_candidates = 50;
  for (const auto& h : enumerate_free_chunks(lex, "lizard", p)) {
    EXPECT_TRUE(find_construction(h.text, lex, "lizard", p).has_value()) << h.text;
  }
  p.mode = ChunkMode::token_aligned;
  for (const auto& h : enumerate_token_aligned(lex, "lizard", p, gf_test::reference_table())) {
    EXPECT_TRUE(find_construction(h.text, lex, "lizard", p, &gf_test::reference_table()).has_value()) << h.text;
  }
}

TEST(Hybridizer, TokenAlignedSubsetOfFree) {
  const auto& lex = gf_test::fixture_lexicon();
  HybridParams p;
  p.max_chunks = 3;
  p.min_chunk_len = 3;
  p.max_len = 14;
  p.max_candidates = 10'000'000;
  for (const auto& c : lex.concepts()) {
    const auto tok = texts(enumerate_token_aligned(lex, c.id, p, gf_test::reference_table()));
    const auto free = texts(enumerate_free_chunks(lex, c.id, p));
    for (const auto& t : tok) EXPECT_TRUE(free.contains(t)) << c.id << ": " << t;
  }
  // sampled token-aligned output is still inside the free space
  HybridParams d;
  d.max_candidates = 40;
  for (const auto& h : enumerate_token_aligned(lex, "cliff", d, gf_test::reference_table())) {
    EXPECT_TRUE(find_construction(h.text, lex, "cliff", HybridParams{}).has_value()) << h.text;
  }
}

TEST(Hybridizer, DeterministicBySeed) {
  const auto& lex = gf_test::fixture_lexicon();
  HybridParams p;
  p.seed = 7;
  const auto a = enumerate_free_chunks(lex, "birds", p);
  const auto b = enumerate_free_chunks(lex, "birds", p);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].text, b[i].text);
    EXPECT_EQ(a[i].chunks, b[i].chunks);
    EXPECT_EQ(candidate_to_json(a[i]), candidate_to_json(b[i]));
  }
  p.seed = 8;
  const auto c = enumerate_free_chunks(lex, "birds", p);
  EXPECT_NE(texts(a), texts(c));
}

TEST(Hybridizer, LanguageRestriction) {
  HybridParams p;
  p.languages = {"fr", "it"};
  p.max_candidates = 200;
  for (const auto& h : enumerate_free_chunks(gf_test::fixture_lexicon(), "birds", p)) {
    EXPECT_EQ(h.languages_covered, (std::set<std::string>{"fr", "it"}));
  }
}

TEST(Hybridizer, InvalidParams) {
  HybridParams p;
  p.min_languages = 0;
  EXPECT_THROW(p.validate(), InputError);
  p = HybridParams{};
  p.max_len = 1;
  EXPECT_THROW(p.validate(), InputError);
  EXPECT_THROW(parse_chunk_mode("bpe"), InputError);
  EXPECT_EQ(parse_chunk_mode("token"), ChunkMode::token_aligned);
}

TEST(Portmanteau, PublishedBlends) {
  auto has = [](const std::vector<BlendCandidate>& v, const std::string& t) {
    return std::any_of(v.begin(), v.end(), [&](const auto& b) { return b.text == t; });
  };
  EXPECT_TRUE(has(portmanteau("creepy", "spooky"), "creepooky"));
  EXPECT_TRUE(has(portmanteau("happy", "cheerful"), "happeerful"));
  EXPECT_TRUE(has(portmanteau("love", "passionate"), "lovssionate"));
  const auto self = portmanteau("abc", "abc");
  EXPECT_FALSE(has(self, "abc"));
  for (const auto& b : portmanteau("creepy", "spooky")) {
    EXPECT_GE(b.prefix_len, 2u);
    EXPECT_GE(b.suffix_len, 3u);
    EXPECT_EQ(b.text, std::string("creepy").substr(0, b.prefix_len) + std::string("spooky").substr(6 - b.suffix_len));
  }
}

TEST(Compose, Examples) {
  EXPECT_EQ(compose_sentence("An {x} eating a {y}, digital art",
                             {{"x", "eidelucertlagarzard"}, {"y", "maripofarterling"}}),
            "An eidelucertlagarzard eating a maripofarterling, digital art");
  EXPECT_EQ(compose_sentence("no placeholders here", {}), "no placeholders here");
  EXPECT_EQ(compose_sentence("A man in a state of {x}", {{"x", "exaspenttausacion"}}),
            "A man in a state of exaspenttausacion");
  EXPECT_EQ(compose_sentence("{x} and {x}", {{"x", "a"}}), "a and a");
}

TEST(Compose, Errors) {
  EXPECT_THROW(compose_sentence("a {x}", {}), InputError);
  EXPECT_THROW(compose_sentence("a {x}", {{"x", "1"}, {"x", "2"}}), InputError);
  EXPECT_THROW(compose_sentence("a {x}", {{"x", "1"}, {"y", "2"}}), InputError);
  EXPECT_THROW(compose_sentence("a {x", {{"x", "1"}}), InputError);
  EXPECT_THROW(compose_sentence("a {}", {}), InputError);
}

TEST(Ranking, EqualScoresFallBackToText) {
  const FixedScorer s({{"b", 0.5}, {"a", 0.5}, {"c", 0.5}});
  const auto r = rank_candidates({bare("c"), bare("a"), bare("b")}, gf_test::fixture_lexicon(), s);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].candidate.text, "a");
  EXPECT_EQ(r[1].candidate.text, "b");
  EXPECT_EQ(r[2].candidate.text, "c");
}

TEST(Ranking, NgramPrefersRealChunks) {
  const NgramScorer s;
  const auto r = rank_candidates({bare("zzzzz"), bare("uccoisegeljaros")}, gf_test::fixture_lexicon(), s);
  EXPECT_EQ(r[0].candidate.text, "uccoisegeljaros");
  EXPECT_GT(r[0].score->score, r[1].score->score);
}

TEST(Ranking, FailuresSortLastAndRunContinues) {
  const FixedScorer s({{"a", 0.1}, {"c", 0.9}});
  const auto r = rank_candidates({bare("b"), bare("a"), bare("c")}, gf_test::fixture_lexicon(), s);
  EXPECT_EQ(r[0].candidate.text, "c");
  EXPECT_EQ(r[1].candidate.text, "a");
  EXPECT_EQ(r[2].candidate.text, "b");
  EXPECT_FALSE(r[2].score.has_value());
  EXPECT_NE(r[2].error.find("scoring_error"), std::string::npos);
  EXPECT_TRUE(rank_candidates({}, gf_test::fixture_lexicon(), s).empty());
}
