#include "glossoforge/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "glossoforge/error.hpp"
#include "glossoforge/tokenizer.hpp"
#include "glossoforge/unicode.hpp"

namespace glossoforge {
namespace {

constexpr std::string_view kIso6391[] = {
    "aa", "ab", "ae", "af", "ak", "am", "an", "ar", "as", "av", "ay", "az", "ba", "be", "bg",
    "bh", "bi", "bm", "bn", "bo", "br", "bs", "ca", "ce", "ch", "co", "cr", "cs", "cu", "cv",
    "cy", "da", "de", "dv", "dz", "ee", "el", "en", "eo", "es", "et", "eu", "fa", "ff", "fi",
    "fj", "fo", "fr", "fy", "ga", "gd", "gl", "gn", "gu", "gv", "ha", "he", "hi", "ho", "hr",
    "ht", "hu", "hy", "hz", "ia", "id", "ie", "ig", "ii", "ik", "io", "is", "it", "iu", "ja",
    "jv", "ka", "kg", "ki", "kj", "kk", "kl", "km", "kn", "ko", "kr", "ks", "ku", "kv", "kw",
    "ky", "la", "lb", "lg", "li", "ln", "lo", "lt", "lu", "lv", "mg", "mh", "mi", "mk", "ml",
    "mn", "mr", "ms", "mt", "my", "na", "nb", "nd", "ne", "ng", "nl", "nn", "no", "nr", "nv",
    "ny", "oc", "oj", "om", "or", "os", "pa", "pi", "pl", "ps", "pt", "qu", "rm", "rn", "ro",
    "ru", "rw", "sa", "sc", "sd", "se", "sg", "si", "sk", "sl", "sm", "sn", "so", "sq", "sr",
    "ss", "st", "su", "sv", "sw", "ta", "te", "tg", "th", "ti", "tk", "tl", "tn", "to", "tr",
    "ts", "tt", "tw", "ty", "ug", "uk", "ur", "uz", "ve", "vi", "vo", "wa", "wi", "wo", "xh",
    "yi", "yo", "za", "zh", "zu"};

struct RawRow {
  std::string concept_id;
  std::string language;
  std::string surface;
  std::string gloss;
  std::size_t line = 0;
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(trim(std::string_view(line).substr(start, tab - start)));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

void add_language(std::vector<std::string>& langs, std::string code) {
  if (std::find(langs.begin(), langs.end(), code) == langs.end()) langs.push_back(std::move(code));
}

std::vector<std::string> parse_language_header(const std::string& body) {
  std::vector<std::string> langs;
  std::string normalized = body;
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  std::istringstream in(normalized);
  for (std::string code; in >> code;) add_language(langs, code);
  return langs;
}

Lexicon build(std::vector<RawRow> rows, std::vector<std::string> order, const std::string& source) {
  const std::set<std::string> declared(order.begin(), order.end());
  if (rows.empty()) throw ParseError(source, 0, "lexicon has no entries");
  std::map<std::pair<std::string, std::string>, std::size_t> seen;
  std::vector<Concept> concepts;
  std::map<std::string, std::size_t> concept_index;
  std::vector<LexiconEntry> entries;
  for (auto& row : rows) {
    if (row.concept_id.empty() || row.language.empty() || row.surface.empty()) {
      throw ParseError(source, row.line, "concept, language and surface must be non-empty");
    }
    if (declared.empty() ? !is_iso639_1(row.language) : !declared.contains(row.language)) {
      throw ParseError(source, row.line, "unknown language code \"" + row.language + "\"");
    }
    auto key = std::make_pair(row.concept_id, row.language);
    if (auto [it, inserted] = seen.emplace(key, row.line); !inserted) {
      throw ParseError(source, row.line,
                       "duplicate entry (" + row.concept_id + ", " + row.language +
                           "), first defined on line " + std::to_string(it->second));
    }
    auto cit = concept_index.find(row.concept_id);
    if (cit == concept_index.end()) {
      concept_index.emplace(row.concept_id, concepts.size());
      concepts.push_back({row.concept_id, row.gloss.empty() ? row.concept_id : row.gloss});
    } else if (!row.gloss.empty() && concepts[cit->second].gloss != row.gloss) {
      throw ParseError(source, row.line, "conflicting gloss for concept " + row.concept_id);
    }
    std::string normalized;
    try {
      normalized = normalize_word(row.surface);
    } catch (const InputError& e) {
      throw ParseError(source, row.line, e.what());
    }
    entries.push_back({row.concept_id, row.language, row.surface, std::move(normalized)});
  }
  if (order.empty()) {
    for (const auto& e : entries) add_language(order, e.language);
    std::sort(order.begin(), order.end());
  }
  try {
    return Lexicon(std::move(concepts), std::move(entries), std::move(order));
  } catch (const InputError& e) {
    throw ParseError(source, 0, e.what());
  }
}

Lexicon load_tsv(std::istream& in, const std::string& source) {
  std::vector<RawRow> rows;
  std::vector<std::string> declared;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.starts_with('#')) {
      const std::string body = trim(std::string_view(t).substr(1));
      if (body.starts_with("languages:")) {
        declared = parse_language_header(body.substr(10));
      }
      continue;
    }
    auto cols = split_tabs(line);
    if (rows.empty() && cols.size() >= 3 && cols[0] == "concept" && cols[1] == "language") {
      continue;
    }
    if (cols.size() < 3 || cols.size() > 4) {
      throw ParseError(source, line_no,
                       "expected 3 or 4 tab-separated columns, found " + std::to_string(cols.size()));
    }
    rows.push_back({cols[0], cols[1], cols[2], cols.size() == 4 ? cols[3] : "", line_no});
  }
  return build(std::move(rows), std::move(declared), source);
}

Lexicon load_json(std::istream& in, const std::string& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, 0, std::string("invalid JSON: ") + e.what());
  }
  std::vector<std::string> declared;
  const nlohmann::json* items = &doc;
  if (doc.is_object()) {
    if (doc.contains("languages")) {
      for (const auto& l : doc.at("languages")) add_language(declared, l.get<std::string>());
    }
    if (!doc.contains("entries")) throw ParseError(source, 0, "missing \"entries\" array");
    items = &doc.at("entries");
  }
  if (!items->is_array()) throw ParseError(source, 0, "expected a JSON array of entries");
  std::vector<RawRow> rows;
  std::size_t index = 0;
  for (const auto& obj : *items) {
    ++index;
    auto field = [&](const char* key, bool required) -> std::string {
      if (!obj.is_object() || !obj.contains(key)) {
        if (required) throw ParseError(source, index, std::string("entry missing \"") + key + "\"");
        return {};
      }
      if (!obj.at(key).is_string()) {
        throw ParseError(source, index, std::string("\"") + key + "\" must be a string");
      }
      return obj.at(key).get<std::string>();
    };
    rows.push_back({field("concept", true), field("language", true), field("surface", true),
                    field("gloss", false), index});
  }
  return build(std::move(rows), std::move(declared), source);
}

}  // namespace

bool is_iso639_1(std::string_view code) {
  return std::binary_search(std::begin(kIso6391), std::end(kIso6391), code);
}

Lexicon::Lexicon(std::vector<Concept> concepts, std::vector<LexiconEntry> entries,
                 std::vector<std::string> declared_languages)
    : concepts_(std::move(concepts)), entries_(std::move(entries)),
      languages_(declared_languages.begin(), declared_languages.end()),
      language_order_(std::move(declared_languages)) {
  if (languages_.size() != language_order_.size()) throw InputError("language declared twice");
  std::set<std::string> ids;
  for (const auto& c : concepts_) {
    if (c.id.empty() || c.gloss.empty()) throw InputError("concept id and gloss must be non-empty");
    if (!ids.insert(c.id).second) throw InputError("duplicate concept id " + c.id);
  }
  std::set<std::pair<std::string, std::string>> pairs;
  std::set<std::string> used;
  for (const auto& e : entries_) {
    if (!ids.contains(e.concept_id)) throw InputError("entry references unknown concept " + e.concept_id);
    if (!languages_.contains(e.language)) throw InputError("undeclared language " + e.language);
    if (!pairs.emplace(e.concept_id, e.language).second) {
      throw InputError("duplicate entry (" + e.concept_id + ", " + e.language + ")");
    }
    if (!unicode::is_ascii_lower_alpha(e.normalized)) {
      throw InputError("entry \"" + e.surface + "\" normalizes to \"" + e.normalized +
                       "\", which is not plain lowercase a-z");
    }
    used.insert(e.concept_id);
    normalized_forms_.insert(e.normalized);
  }
  for (const auto& c : concepts_) {
    if (!used.contains(c.id)) throw InputError("concept " + c.id + " has no entries");
  }
}

const Concept& Lexicon::concept_by_id(std::string_view id) const {
  for (const auto& c : concepts_) {
    if (c.id == id) return c;
  }
  throw InputError("unknown concept \"" + std::string(id) + "\"");
}

bool Lexicon::has_concept(std::string_view id) const {
  return std::any_of(concepts_.begin(), concepts_.end(), [&](const Concept& c) { return c.id == id; });
}

const LexiconEntry* Lexicon::find(std::string_view concept_id, std::string_view language) const {
  for (const auto& e : entries_) {
    if (e.concept_id == concept_id && e.language == language) return &e;
  }
  return nullptr;
}

std::vector<const LexiconEntry*> Lexicon::entries_for(std::string_view concept_id) const {
  std::vector<const LexiconEntry*> out;
  for (const auto& e : entries_) {
    if (e.concept_id == concept_id) out.push_back(&e);
  }
  std::sort(out.begin(), out.end(),
            [](const LexiconEntry* a, const LexiconEntry* b) { return a->language < b->language; });
  return out;
}

std::size_t Lexicon::index_of(const LexiconEntry& entry) const {
  const auto* p = &entry;
  if (p < entries_.data() || p >= entries_.data() + entries_.size()) {
    throw InputError("entry does not belong to this lexicon");
  }
  return static_cast<std::size_t>(p - entries_.data());
}

bool Lexicon::contains_normalized(std::string_view word) const {
  return normalized_forms_.contains(std::string(word));
}

std::string Lexicon::to_tsv() const {
  std::ostringstream out;
  out << "# languages:";
  for (const auto& l : language_order_) out << ' ' << l;
  out << "\nconcept\tlanguage\tsurface\tgloss\n";
  for (const auto& e : entries_) {
    out << e.concept_id << '\t' << e.language << '\t' << e.surface << '\t'
        << concept_by_id(e.concept_id).gloss << '\n';
  }
  return out.str();
}

std::string Lexicon::to_json() const {
  nlohmann::ordered_json doc;
  doc["languages"] = language_order_;
  doc["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : entries_) {
    doc["entries"].push_back({{"concept", e.concept_id},
                              {"language", e.language},
                              {"surface", e.surface},
                              {"gloss", concept_by_id(e.concept_id).gloss}});
  }
  return doc.dump(2) + "\n";
}

Lexicon load_lexicon(std::istream& in, LexiconFormat format, const std::string& source_name) {
  return format == LexiconFormat::tsv ? load_tsv(in, source_name) : load_json(in, source_name);
}

Lexicon load_lexicon_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open lexicon: " + path);
  const bool json = path.ends_with(".json");
  return load_lexicon(in, json ? LexiconFormat::json : LexiconFormat::tsv, path);
}

std::vector<LexiconEntry> translations(const Lexicon& lexicon, std::string_view concept_id,
                                       const std::set<std::string>& languages) {
  if (!lexicon.has_concept(concept_id)) {
    throw InputError("unknown concept \"" + std::string(concept_id) + "\"");
  }
  std::vector<LexiconEntry> out;
  for (const auto& lang : lexicon.language_order()) {
    if (!languages.contains(lang)) continue;
    if (const auto* e = lexicon.find(concept_id, lang)) out.push_back(*e);
  }
  return out;
}

}  // namespace glossoforge
