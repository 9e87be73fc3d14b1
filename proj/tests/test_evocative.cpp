#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "glossoforge/error.hpp"
#include "glossoforge/evocative.hpp"
#include "glossoforge/unicode.hpp"
#include "support.hpp"

using namespace glossoforge;

namespace {

const MorphologyConfig& config() {
  static const auto cfg = load_morphology(gf_test::data("morphology.json"));
  return cfg;
}

const MorphologyClassifier& classifier() {
  static const auto clf = MorphologyClassifier::train(config().seed_lists);
  return clf;
}

bool contains_text(const std::vector<EvocativeCandidate>& cs, const std::string& t) {
  return std::any_of(cs.begin(), cs.end(), [&](const auto& c) { return c.text == t; });
}

LeakGuard full_guard() {
  LeakGuard g;
  for (const auto& [d, terms] : config().seed_lists) {
    for (const auto& t : terms) g.add(t);
  }
  for (const auto& e : gf_test::fixture_lexicon().entries()) g.add(e.normalized);
  return g;
}

// Multinomial naive Bayes written out longhand.
std::map<std::string, double> oracle_posterior(const std::map<std::string, std::vector<std::string>>& train,
                                               const std::string& text) {
  auto grams = [](const std::string& s) {
    std::vector<std::string> cps{"^"};
    for (const auto& cp : unicode::code_points(unicode::fold(s))) cps.push_back(cp);
    cps.push_back("$");
    std::vector<std::string> out;
    for (std::size_t i = 0; i + 2 <= cps.size(); ++i) out.push_back(cps[i] + cps[i + 1]);
    for (std::size_t i = 0; i + 3 <= cps.size(); ++i) out.push_back(cps[i] + cps[i + 1] + cps[i + 2]);
    return out;
  };
  std::set<std::string> vocab;
  std::map<std::string, std::map<std::string, double>> counts;
  std::map<std::string, double> totals;
  for (const auto& [d, terms] : train) {
    for (const auto& t : terms) {
      for (const auto& g : grams(t)) {
        counts[d][g] += 1;
        totals[d] += 1;
        vocab.insert(g);
      }
    }
  }
  std::map<std::string, double> ll;
  for (const auto& [d, terms] : train) {
    for (const auto& g : grams(text)) ll[d] += std::log((counts[d][g] + 1) / (totals[d] + vocab.size()));
  }
  double m = -INFINITY;
  for (const auto& [d, v] : ll) m = std::max(m, v);
  double z = 0;
  for (const auto& [d, v] : ll) z += std::exp(v - m);
  std::map<std::string, double> post;
  for (const auto& [d, v] : ll) post[d] = std::exp(v - m) / z;
  return post;
}

}  // namespace

TEST(Morphology, ConfigLoads) {
  const auto& cfg = config();
  EXPECT_EQ(cfg.domains(), (std::vector<std::string>{"pharma", "taxonomy", "toponym:de", "toponym:fr", "toponym:it"}));
  EXPECT_EQ(cfg.at("taxonomy").suffix_inventory, (std::vector<std::string>{"us", "a", "era", "is"}));
  EXPECT_EQ(cfg.at("taxonomy").secondary_suffix_inventory,
            (std::vector<std::string>{"ensis", "is", "ae", "tris", "anensis", "osus"}));
  EXPECT_EQ(cfg.at("pharma").suffix_inventory, (std::vector<std::string>{"axin", "ofen", "ol", "ine", "ix"}));
  for (const auto& d : cfg.domains()) EXPECT_GE(cfg.seed_lists.at(d).size(), 50u) << d;
  EXPECT_THROW(cfg.at("toponym:xx"), InputError);
}

TEST(Morphology, TemplateValidation) {
  MorphTemplate t = config().at("pharma");
  t.suffix_inventory.clear();
  EXPECT_THROW(t.validate(), InputError);
  t = config().at("pharma");
  t.suffix_inventory.push_back("AX1");
  EXPECT_THROW(t.validate(), InputError);
  t = config().at("pharma");
  t.syllables.onsets.push_back("ß");
  EXPECT_THROW(t.validate(), InputError);
}

TEST(Taxonomy, EnglishStemsInLatinFrames) {
  EvocativeParams p;
  p.stems = {"scari", "ferocian"};
  p.suffixes = {"osus"};
  p.secondary_suffixes = {"ensis"};
  EXPECT_TRUE(contains_text(generate_taxonomy(config().at("taxonomy"), p), "scariosus ferocianensis"));
  p.stems = {"cuti", "adorabl"};
  const auto out = generate_taxonomy(config().at("taxonomy"), p);
  EXPECT_TRUE(contains_text(out, "cutiosus adorablensis"));
  EXPECT_EQ(out.size(), 4u);
  p.stems = {"Cuti"};
  EXPECT_THROW(generate_taxonomy(config().at("taxonomy"), p), InputError);
}

TEST(Taxonomy, SeededBinomials) {
  EvocativeParams p;
  p.count = 50;
  p.seed = 3;
  const auto a = generate_taxonomy(config().at("taxonomy"), p);
  const auto b = generate_taxonomy(config().at("taxonomy"), p);
  ASSERT_EQ(a.size(), 50u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].text, b[i].text);
  const auto& tmpl = config().at("taxonomy");
  for (const auto& c : a) {
    const auto words = unicode::split_whitespace(c.text);
    ASSERT_EQ(words.size(), 2u) << c.text;
    ASSERT_EQ(c.parts.size(), 5u);
    std::string joined;
    for (const auto& part : c.parts) joined += part.text;
    EXPECT_EQ(joined, c.text);
    EXPECT_TRUE(std::find(tmpl.suffix_inventory.begin(), tmpl.suffix_inventory.end(), c.parts[1].text) !=
                tmpl.suffix_inventory.end());
    EXPECT_TRUE(words[1].ends_with(c.parts[4].text));
    EXPECT_EQ(c.seed, 3u);
  }
}

TEST(Pharma, PublishedNameAsParts) {
  const auto c = assemble(config().at("pharma"), {{SlotKind::stem, "vacyl", "vacyl"},
                                                  {SlotKind::stem, "or", "or"},
                                                  {SlotKind::suffix, "axin", "axin"}});
  EXPECT_EQ(c.text, "vacyloraxin");
  EXPECT_THROW(assemble(config().at("pharma"), {{SlotKind::stem, "vacyl", "vacyl"}, {SlotKind::suffix, "us", "us"}}),
               InputError);
}

TEST(Pharma, DeterministicAndClassified) {
  EvocativeParams p;
  p.count = 1000;
  const auto a = generate_pharma(config().at("pharma"), p);
  const auto b = generate_pharma(config().at("pharma"), p);
  ASSERT_EQ(a.size(), 1000u);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].text, b[i].text);
    hits += classifier().argmax(a[i].text) == "pharma";
  }
  EXPECT_GE(hits, 950u);
}

TEST(Toponym, PublishedNamesAsParts) {
  const auto de = assemble(config().at("toponym:de"), {{SlotKind::stem, "wolden", "Wolden"}, {SlotKind::suffix, "", "büchel"}});
  EXPECT_EQ(de.text, "woldenbuchel");
  EXPECT_EQ(de.surface, "Woldenbüchel");
  EXPECT_EQ(assemble(config().at("toponym:it"), {{SlotKind::stem, "valtori", "valtori"}, {SlotKind::suffix, "giano", "giano"}}).text,
            "valtorigiano");
  EXPECT_EQ(assemble(config().at("toponym:fr"), {{SlotKind::stem, "beausson", "beausson"}, {SlotKind::suffix, "cour", "cour"}}).text,
            "beaussoncour");
  EXPECT_THROW(generate_toponym(config().at("pharma"), EvocativeParams{}), InputError);
}

TEST(Toponym, SurfaceKeepsDiacritics) {
  EvocativeParams p;
  p.count = 200;
  bool saw_umlaut = false;
  for (const auto& c : generate_toponym(config().at("toponym:de"), p)) {
    EXPECT_EQ(unicode::fold(c.surface), c.text);
    EXPECT_TRUE(unicode::is_ascii_lower_alpha(c.text)) << c.text;
    saw_umlaut = saw_umlaut || c.surface.ends_with("büchel");
  }
  EXPECT_TRUE(saw_umlaut);
}

TEST(Evocative, NoLeakage) {
  const auto guard = full_guard();
  EXPECT_GT(guard.size(), 900u);
  std::set<std::string> forbidden;
  for (const auto& [d, terms] : config().seed_lists) {
    for (const auto& t : terms) forbidden.insert(unicode::fold(t));
  }
  for (const auto& d : config().domains()) {
    EvocativeParams p;
    p.count = 500;
    p.seed = 99;
    for (const auto& c : generate(config().at(d), p, guard)) {
      EXPECT_FALSE(forbidden.contains(c.text)) << c.text;
      EXPECT_FALSE(gf_test::fixture_lexicon().contains_normalized(c.text)) << c.text;
    }
  }
  // a guard really removes what it lists
  EvocativeParams p;
  p.stems = {"bogir"};
  p.suffixes = {"us"};
  p.secondary_suffixes = {"ae"};
  LeakGuard g;
  g.add("Bogirus bogirae");
  EXPECT_TRUE(generate_taxonomy(config().at("taxonomy"), p, g).empty());
}

TEST(Classifier, PublishedStrings) {
  const auto& clf = classifier();
  EXPECT_EQ(clf.argmax("ceralineus rabaventis"), "taxonomy");
  EXPECT_EQ(clf.argmax("rygamera pultris"), "taxonomy");
  EXPECT_EQ(clf.argmax("bogirus bogirae"), "taxonomy");
  EXPECT_EQ(clf.argmax("vacyloraxin"), "pharma");
  EXPECT_EQ(clf.argmax("walbotricypofen"), "pharma");
  EXPECT_EQ(clf.argmax("Woldenbüchel"), "toponym:de");
  EXPECT_THROW(clf.classify(""), InputError);
  EXPECT_THROW(clf.classify("   "), InputError);
}

TEST(Classifier, ProbabilityVectors) {
  for (const auto& s : {"a", "bogirus bogirae", "zzzz", "Valtorigiano", "x y z", "ibuprofen"}) {
    const auto post = classifier().classify(s);
    double sum = 0;
    for (const auto& [d, v] : post) {
      EXPECT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9) << s;
    EXPECT_EQ(post.size(), 5u);
  }
}

TEST(Classifier, TrainingExamplesMemorized) {
  std::size_t total = 0;
  std::size_t hits = 0;
  for (const auto& [d, terms] : config().seed_lists) {
    for (const auto& t : terms) {
      ++total;
      hits += classifier().argmax(t) == d;
    }
  }
  EXPECT_GE(static_cast<double>(hits) / static_cast<double>(total), 0.95) << hits << "/" << total;
}

TEST(Classifier, MatchesLonghandOracle) {
  const std::map<std::string, std::vector<std::string>> train{
      {"x", {"abca", "bcab", "ca"}}, {"y", {"zzb", "zyz", "bzz z"}}, {"w", {"über", "ubar"}}};
  const auto clf = MorphologyClassifier::train(train);
  for (const auto& probe : {"abc", "zz", "ub", "q", "cab zz", "Über"}) {
    const auto got = clf.classify(probe);
    const auto want = oracle_posterior(train, probe);
    for (const auto& [d, v] : want) EXPECT_NEAR(got.at(d), v, 1e-12) << probe << " " << d;
  }
  EXPECT_EQ(clf.argmax("abcabc"), "x");
  EXPECT_EQ(clf.argmax("zzzz"), "y");
}

TEST(Classifier, NgramShape) {
  EXPECT_EQ(morphology_ngrams("ab"), (std::vector<std::string>{"^a", "ab", "b$", "^ab", "ab$"}));
  EXPECT_EQ(morphology_ngrams("Ä").front(), "^a");
}
