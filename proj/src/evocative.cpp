#include "glossoforge/evocative.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "glossoforge/error.hpp"
#include "glossoforge/unicode.hpp"

namespace glossoforge {
namespace {

SlotKind parse_slot(const std::string& s) {
  if (s == "stem") return SlotKind::stem;
  if (s == "suffix") return SlotKind::suffix;
  if (s == "secondary_suffix") return SlotKind::secondary_suffix;
  if (s == "word_break") return SlotKind::word_break;
  throw InputError("unknown morphology slot \"" + s + "\"");
}

std::vector<std::string> read_terms(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open seed list: " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t");
    out.push_back(line.substr(first, last - first + 1));
  }
  return out;
}

const std::string& pick(SeededRng& rng, const std::vector<std::string>& pool) {
  return pool[rng.below(pool.size())];
}

bool is_vowel(char c) { return std::string_view("aeiouy").find(c) != std::string_view::npos; }

std::string syllable_stem(SeededRng& rng, const SyllableInventory& inv) {
  const auto n = rng.between(inv.min_syllables, inv.max_syllables);
  std::string stem;
  for (std::uint64_t i = 0; i < n; ++i) {
    stem += pick(rng, inv.onsets);
    stem += pick(rng, inv.nuclei);
    if (!inv.codas.empty() && rng.chance(inv.coda_percent, 100)) stem += pick(rng, inv.codas);
  }
  return stem;
}

const std::vector<std::string>& choose(const std::vector<std::string>& override_list,
                                       const std::vector<std::string>& fallback) {
  return override_list.empty() ? fallback : override_list;
}

// Draws until `count` distinct, non-leaking candidates exist or the attempt
// budget runs out.
template <typename Draw>
std::vector<EvocativeCandidate> draw_unique(const EvocativeParams& params, const LeakGuard& guard,
                                            Draw&& draw) {
  SeededRng rng(params.seed);
  std::vector<EvocativeCandidate> out;
  std::set<std::string> seen;
  const std::size_t budget = params.count * 200 + 1000;
  for (std::size_t attempt = 0; attempt < budget && out.size() < params.count; ++attempt) {
    EvocativeCandidate c = draw(rng);
    c.seed = params.seed;
    if (guard.leaks(c) || !seen.insert(c.text).second) continue;
    out.push_back(std::move(c));
  }
  return out;
}

EvocativeCandidate stem_plus_suffix(const MorphTemplate& tmpl, SeededRng& rng,
                                    const std::vector<std::string>& suffixes) {
  std::string stem = syllable_stem(rng, tmpl.syllables);
  const std::string& suffix = pick(rng, suffixes);
  if (!tmpl.syllables.joins.empty() && is_vowel(stem.back()) && !suffix.empty() && is_vowel(suffix.front())) {
    stem += pick(rng, tmpl.syllables.joins);
  }
  return assemble(tmpl, {{SlotKind::stem, stem, stem}, {SlotKind::suffix, unicode::fold(suffix), suffix}});
}

}  // namespace

std::string_view to_string(SlotKind slot) {
  switch (slot) {
    case SlotKind::stem: return "stem";
    case SlotKind::suffix: return "suffix";
    case SlotKind::secondary_suffix: return "secondary_suffix";
    case SlotKind::word_break: return "word_break";
  }
  return "stem";
}

void MorphTemplate::validate() const {
  if (suffix_inventory.empty()) throw InputError("template " + domain + " has no suffixes");
  auto check_suffixes = [&](const std::vector<std::string>& list) {
    for (const auto& s : list) {
      if (!unicode::is_ascii_lower_alpha(unicode::fold(s))) {
        throw InputError("suffix \"" + s + "\" of " + domain + " does not fold to lowercase a-z");
      }
    }
  };
  check_suffixes(suffix_inventory);
  check_suffixes(secondary_suffix_inventory);
  const bool needs_secondary =
      std::find(slots.begin(), slots.end(), SlotKind::secondary_suffix) != slots.end();
  if (needs_secondary && secondary_suffix_inventory.empty()) {
    throw InputError("template " + domain + " needs secondary suffixes");
  }
  const auto& syl = syllables;
  if (syl.nuclei.empty() || syl.onsets.empty()) {
    throw InputError("template " + domain + " needs onsets and nuclei");
  }
  if (syl.min_syllables == 0 || syl.min_syllables > syl.max_syllables) {
    throw InputError("template " + domain + " has an invalid syllable range");
  }
  if (syl.coda_percent > 100) throw InputError("coda_percent must be <= 100");
  for (const auto* pool : {&syl.onsets, &syl.nuclei, &syl.codas, &syl.joins}) {
    for (const auto& g : *pool) {
      if (!g.empty() && !unicode::is_ascii_lower_alpha(g)) {
        throw InputError("grapheme \"" + g + "\" of " + domain + " is not lowercase a-z");
      }
    }
  }
  for (const auto& j : syl.joins) {
    if (j.empty()) throw InputError("empty join in " + domain);
  }
  for (const auto& n : syl.nuclei) {
    if (n.empty()) throw InputError("empty nucleus in " + domain);
  }
}

const MorphTemplate& MorphologyConfig::at(std::string_view domain) const {
  auto it = templates.find(std::string(domain));
  if (it == templates.end()) throw InputError("unknown morphology domain \"" + std::string(domain) + "\"");
  return it->second;
}

std::vector<std::string> MorphologyConfig::domains() const {
  std::vector<std::string> out;
  for (const auto& [d, t] : templates) out.push_back(d);
  return out;
}

MorphologyConfig load_morphology(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open morphology file: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path, 0, std::string("invalid JSON: ") + e.what());
  }
  MorphologyConfig cfg;
  try {
    for (const auto& [domain, t] : doc.at("templates").items()) {
      MorphTemplate tmpl;
      tmpl.domain = domain;
      for (const auto& s : t.at("slots")) tmpl.slots.push_back(parse_slot(s.get<std::string>()));
      tmpl.suffix_inventory = t.at("suffixes").get<std::vector<std::string>>();
      if (t.contains("secondary_suffixes")) {
        tmpl.secondary_suffix_inventory = t.at("secondary_suffixes").get<std::vector<std::string>>();
      }
      const auto& syl = t.at("syllables");
      tmpl.syllables.onsets = syl.at("onsets").get<std::vector<std::string>>();
      tmpl.syllables.nuclei = syl.at("nuclei").get<std::vector<std::string>>();
      tmpl.syllables.codas = syl.value("codas", std::vector<std::string>{});
      tmpl.syllables.coda_percent = syl.value("coda_percent", 0u);
      tmpl.syllables.joins = syl.value("joins", std::vector<std::string>{});
      tmpl.syllables.min_syllables = syl.value("min_syllables", std::size_t{1});
      tmpl.syllables.max_syllables = syl.value("max_syllables", std::size_t{1});
      tmpl.validate();
      cfg.templates.emplace(domain, std::move(tmpl));
    }
    const auto base = std::filesystem::path(path).parent_path();
    if (doc.contains("seed_lists")) {
      for (const auto& [domain, rel] : doc.at("seed_lists").items()) {
        cfg.seed_lists.emplace(domain, read_terms(base / rel.get<std::string>()));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 0, std::string("malformed morphology file: ") + e.what());
  }
  return cfg;
}

EvocativeCandidate assemble(const MorphTemplate& tmpl, const std::vector<EvocativePart>& parts,
                            std::uint64_t seed) {
  auto folded_set = [](const std::vector<std::string>& list) {
    std::set<std::string> s;
    for (const auto& x : list) s.insert(unicode::fold(x));
    return s;
  };
  const auto primary = folded_set(tmpl.suffix_inventory);
  const auto secondary = folded_set(tmpl.secondary_suffix_inventory);
  EvocativeCandidate c;
  c.domain = tmpl.domain;
  c.seed = seed;
  for (const auto& part : parts) {
    EvocativePart p = part;
    if (p.surface.empty()) p.surface = p.text;
    if (p.slot == SlotKind::word_break) {
      p.text = " ";
      p.surface = " ";
    } else {
      p.text = unicode::fold(p.surface);
      if (p.text.empty()) throw InputError("empty morphology part");
    }
    if (p.slot == SlotKind::suffix && !primary.contains(p.text) && !secondary.contains(p.text)) {
      throw InputError("suffix \"" + p.surface + "\" is not in the " + tmpl.domain + " inventory");
    }
    if (p.slot == SlotKind::secondary_suffix && !secondary.contains(p.text)) {
      throw InputError("suffix \"" + p.surface + "\" is not in the " + tmpl.domain + " inventory");
    }
    c.text += p.text;
    c.surface += p.surface;
    c.parts.push_back(std::move(p));
  }
  return c;
}

void LeakGuard::add(std::string_view term) {
  const std::string folded = unicode::fold(term);
  forbidden_.insert(folded);
  for (auto& w : unicode::split_whitespace(folded)) forbidden_.insert(std::move(w));
}

bool LeakGuard::leaks(const EvocativeCandidate& c) const {
  if (forbidden_.contains(c.text)) return true;
  for (const auto& w : unicode::split_whitespace(c.text)) {
    if (forbidden_.contains(w)) return true;
  }
  return false;
}

std::vector<EvocativeCandidate> generate_taxonomy(const MorphTemplate& tmpl,
                                                  const EvocativeParams& params,
                                                  const LeakGuard& guard) {
  const auto& genus = choose(params.suffixes, tmpl.suffix_inventory);
  const auto& species = choose(params.secondary_suffixes, tmpl.secondary_suffix_inventory);
  MorphTemplate effective = tmpl;
  effective.suffix_inventory = genus;
  effective.secondary_suffix_inventory = species;
  effective.validate();

  if (!params.stems.empty()) {
    for (const auto& s : params.stems) {
      if (s.empty() || unicode::fold(s) != s) throw InputError("stems must be non-empty lowercase: " + s);
    }
    std::vector<EvocativeCandidate> out;
    std::set<std::string> seen;
    for (const auto& g_stem : params.stems) {
      for (const auto& g_suf : genus) {
        for (const auto& s_stem : params.stems) {
          for (const auto& s_suf : species) {
            auto c = assemble(effective,
                              {{SlotKind::stem, g_stem, g_stem},
                               {SlotKind::suffix, g_suf, g_suf},
                               {SlotKind::word_break, " ", " "},
                               {SlotKind::stem, s_stem, s_stem},
                               {SlotKind::secondary_suffix, s_suf, s_suf}},
                              params.seed);
            if (guard.leaks(c) || !seen.insert(c.text).second) continue;
            out.push_back(std::move(c));
          }
        }
      }
    }
    return out;
  }

  return draw_unique(params, guard, [&](SeededRng& rng) {
    const std::string g_stem = syllable_stem(rng, tmpl.syllables);
    const std::string& g_suf = pick(rng, genus);
    const std::string s_stem = syllable_stem(rng, tmpl.syllables);
    const std::string& s_suf = pick(rng, species);
    return assemble(effective, {{SlotKind::stem, g_stem, g_stem},
                                {SlotKind::suffix, g_suf, g_suf},
                                {SlotKind::word_break, " ", " "},
                                {SlotKind::stem, s_stem, s_stem},
                                {SlotKind::secondary_suffix, s_suf, s_suf}});
  });
}

std::vector<EvocativeCandidate> generate_pharma(const MorphTemplate& tmpl,
                                                const EvocativeParams& params,
                                                const LeakGuard& guard) {
  const auto& suffixes = choose(params.suffixes, tmpl.suffix_inventory);
  MorphTemplate effective = tmpl;
  effective.suffix_inventory = suffixes;
  effective.validate();
  return draw_unique(params, guard,
                     [&](SeededRng& rng) { return stem_plus_suffix(effective, rng, suffixes); });
}

std::vector<EvocativeCandidate> generate_toponym(const MorphTemplate& tmpl,
                                                 const EvocativeParams& params,
                                                 const LeakGuard& guard) {
  if (!tmpl.domain.starts_with("toponym")) {
    throw InputError("template " + tmpl.domain + " is not a toponym template");
  }
  return generate_pharma(tmpl, params, guard);
}

std::vector<EvocativeCandidate> generate(const MorphTemplate& tmpl, const EvocativeParams& params,
                                         const LeakGuard& guard) {
  if (tmpl.domain == "taxonomy") return generate_taxonomy(tmpl, params, guard);
  if (tmpl.domain.starts_with("toponym")) return generate_toponym(tmpl, params, guard);
  return generate_pharma(tmpl, params, guard);
}

std::vector<std::string> morphology_ngrams(std::string_view text) {
  std::vector<std::string> cps{"^"};
  for (auto& cp : unicode::code_points(unicode::fold(text))) cps.push_back(std::move(cp));
  cps.emplace_back("$");
  std::vector<std::string> grams;
  for (std::size_t n = 2; n <= 3; ++n) {
    for (std::size_t i = 0; i + n <= cps.size(); ++i) {
      std::string g;
      for (std::size_t k = 0; k < n; ++k) g += cps[i + k];
      grams.push_back(std::move(g));
    }
  }
  return grams;
}

MorphologyClassifier MorphologyClassifier::train(
    const std::map<std::string, std::vector<std::string>>& examples) {
  MorphologyClassifier model;
  for (const auto& [domain, terms] : examples) {
    if (terms.empty()) throw InputError("no training examples for domain " + domain);
    model.domains_.push_back(domain);
    auto& counts = model.counts_[domain];
    auto& total = model.totals_[domain];
    for (const auto& term : terms) {
      for (auto& g : morphology_ngrams(term)) {
        ++counts[g];
        ++total;
        model.vocabulary_.insert(std::move(g));
      }
    }
  }
  if (model.domains_.empty()) throw InputError("classifier needs at least one domain");
  return model;
}

double MorphologyClassifier::log_likelihood(std::string_view text, const std::string& domain) const {
  const auto& counts = counts_.at(domain);
  const double denom = static_cast<double>(totals_.at(domain) + vocabulary_.size());
  double ll = 0.0;
  for (const auto& g : morphology_ngrams(text)) {
    auto it = counts.find(g);
    const double c = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    ll += std::log((c + 1.0) / denom);
  }
  return ll;
}

std::map<std::string, double> MorphologyClassifier::classify(std::string_view text) const {
  if (text.empty() || unicode::split_whitespace(text).empty()) {
    throw InputError("cannot classify empty text");
  }
  std::map<std::string, double> ll;
  double best = -INFINITY;
  for (const auto& d : domains_) {
    ll[d] = log_likelihood(text, d);
    best = std::max(best, ll[d]);
  }
  double z = 0.0;
  for (auto& [d, v] : ll) {
    v = std::exp(v - best);
    z += v;
  }
  for (auto& [d, v] : ll) v /= z;
  return ll;
}

std::string MorphologyClassifier::argmax(std::string_view text) const {
  const auto scores = classify(text);
  std::string best;
  double best_p = -1.0;
  for (const auto& d : domains_) {
    if (scores.at(d) > best_p) {
      best_p = scores.at(d);
      best = d;
    }
  }
  return best;
}

}  // namespace glossoforge
