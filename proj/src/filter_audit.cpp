#include "glossoforge/filter_audit.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "glossoforge/error.hpp"
#include "glossoforge/unicode.hpp"

namespace glossoforge {
namespace {

std::vector<std::string> read_lines(std::istream& in, std::set<std::string>* languages) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::string body = line.substr(first + 1);
      const auto colon = body.find(':');
      if (languages != nullptr && colon != std::string::npos) {
        const auto key = body.substr(0, colon);
        if (key.find("language") != std::string::npos) {
          std::replace(body.begin(), body.end(), ',', ' ');
          std::istringstream codes(body.substr(colon + 1));
          for (std::string c; codes >> c;) languages->insert(c);
        }
      }
      continue;
    }
    const auto last = line.find_last_not_of(" \t");
    out.push_back(line.substr(first, last - first + 1));
  }
  return out;
}

// Elided articles ("l'oiseau") are split so each part is looked up alone.
std::vector<std::string> split_apostrophes(const std::string& token) {
  std::vector<std::string> parts;
  std::string current;
  for (std::size_t i = 0; i < token.size();) {
    if (token[i] == '\'') {
      parts.push_back(std::move(current));
      current.clear();
      ++i;
    } else if (token.compare(i, 3, "\xE2\x80\x99") == 0) {  // U+2019
      parts.push_back(std::move(current));
      current.clear();
      i += 3;
    } else {
      current.push_back(token[i]);
      ++i;
    }
  }
  parts.push_back(std::move(current));
  return parts;
}

// Numerically exact comparison of a/b against c/d.
int compare_ratio(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
  const auto lhs = static_cast<std::uint64_t>(a) * d;
  const auto rhs = static_cast<std::uint64_t>(c) * b;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

struct PieceOption {
  std::size_t begin;
  std::size_t end;
  std::size_t entry;
  std::size_t source_begin;
  std::size_t concept_index;
};

// (covered bytes, bytes of the favoured concept, -pieces), compared
// lexicographically.
struct Value {
  long covered = 0;
  long favoured = 0;
  long neg_pieces = 0;
  auto operator<=>(const Value&) const = default;
  Value operator+(const Value& o) const {
    return {covered + o.covered, favoured + o.favoured, neg_pieces + o.neg_pieces};
  }
  Value operator-(const Value& o) const {
    return {covered - o.covered, favoured - o.favoured, neg_pieces - o.neg_pieces};
  }
};

}  // namespace

std::string_view to_string(BlacklistMode mode) {
  return mode == BlacklistMode::exact_token ? "exact_token" : "substring";
}

BlacklistMode parse_blacklist_mode(std::string_view text) {
  if (text == "exact" || text == "exact_token") return BlacklistMode::exact_token;
  if (text == "substring") return BlacklistMode::substring;
  throw InputError("unknown blacklist mode \"" + std::string(text) + "\" (expected exact|substring)");
}

Blacklist Blacklist::from_terms(const std::vector<std::string>& raw, BlacklistMode mode) {
  Blacklist bl;
  bl.mode = mode;
  for (const auto& t : raw) {
    std::string n = unicode::fold(t);
    if (!n.empty()) bl.terms.insert(std::move(n));
  }
  if (bl.terms.empty()) throw InputError("blacklist has no terms");
  return bl;
}

WhitelistVocabulary WhitelistVocabulary::from_words(const std::vector<std::string>& raw,
                                                    std::set<std::string> languages) {
  WhitelistVocabulary wl;
  wl.languages = std::move(languages);
  for (const auto& w : raw) {
    std::string n = unicode::fold(w);
    if (!n.empty()) wl.words.insert(std::move(n));
  }
  if (wl.words.empty()) throw InputError("whitelist vocabulary has no words");
  return wl;
}

void WhitelistVocabulary::merge(const WhitelistVocabulary& other) {
  words.insert(other.words.begin(), other.words.end());
  languages.insert(other.languages.begin(), other.languages.end());
}

Blacklist load_blacklist(std::istream& in, BlacklistMode mode) {
  return Blacklist::from_terms(read_lines(in, nullptr), mode);
}

Blacklist load_blacklist_file(const std::string& path, BlacklistMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open blacklist: " + path);
  return load_blacklist(in, mode);
}

WhitelistVocabulary load_whitelist(std::istream& in) {
  std::set<std::string> languages;
  auto words = read_lines(in, &languages);
  return WhitelistVocabulary::from_words(words, std::move(languages));
}

WhitelistVocabulary load_whitelist_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open whitelist: " + path);
  return load_whitelist(in);
}

std::vector<std::string> prompt_tokens(std::string_view prompt) {
  std::vector<std::string> out;
  for (const auto& raw : unicode::split_whitespace(prompt)) {
    for (const auto& part : split_apostrophes(raw)) {
      std::string t = unicode::fold(unicode::strip_edge_punctuation(part));
      if (!t.empty()) out.push_back(std::move(t));
    }
  }
  return out;
}

FilterVerdict blacklist_filter(std::string_view prompt, const Blacklist& bl) {
  FilterVerdict v;
  auto note = [&](const std::string& reason) {
    if (std::find(v.reasons.begin(), v.reasons.end(), reason) == v.reasons.end()) {
      v.reasons.push_back(reason);
    }
  };
  const auto tokens = prompt_tokens(prompt);
  if (bl.mode == BlacklistMode::exact_token) {
    for (const auto& t : tokens) {
      if (bl.terms.contains(t)) note(t);
    }
  } else {
    std::string joined;
    for (const auto& t : tokens) joined += t;
    std::vector<std::pair<std::size_t, std::string>> hits;
    for (const auto& term : bl.terms) {
      const auto at = joined.find(term);
      if (at != std::string::npos) hits.emplace_back(at, term);
    }
    std::sort(hits.begin(), hits.end());
    for (const auto& [at, term] : hits) note(term);
  }
  v.passed = v.reasons.empty();
  return v;
}

FilterVerdict whitelist_filter(std::string_view prompt, const WhitelistVocabulary& wl) {
  FilterVerdict v;
  for (const auto& t : prompt_tokens(prompt)) {
    if (!wl.words.contains(t) && std::find(v.reasons.begin(), v.reasons.end(), t) == v.reasons.end()) {
      v.reasons.push_back(t);
    }
  }
  v.passed = v.reasons.empty();
  return v;
}

void finalize(Decomposition& d) {
  std::map<std::string, std::size_t> by_concept;
  d.covered = 0;
  for (const auto& p : d.pieces) {
    d.covered += p.span.size();
    by_concept[p.concept_id] += p.span.size();
  }
  d.modal_concept.clear();
  d.modal_covered = 0;
  for (const auto& [c, bytes] : by_concept) {  // ascending id: first max wins
    if (bytes > d.modal_covered) {
      d.modal_covered = bytes;
      d.modal_concept = c;
    }
  }
  d.coverage = d.nonce.empty() ? 0.0 : static_cast<double>(d.covered) / static_cast<double>(d.nonce.size());
  d.coherence = d.covered == 0 ? 0.0 : static_cast<double>(d.modal_covered) / static_cast<double>(d.covered);
}

bool ranks_before(const Decomposition& a, const Decomposition& b) {
  if (int c = compare_ratio(a.covered, a.nonce.size(), b.covered, b.nonce.size()); c != 0) return c > 0;
  if (int c = compare_ratio(a.modal_covered, std::max<std::size_t>(a.covered, 1), b.modal_covered,
                            std::max<std::size_t>(b.covered, 1));
      c != 0) {
    return c > 0;
  }
  if (a.pieces.size() != b.pieces.size()) return a.pieces.size() < b.pieces.size();
  return std::lexicographical_compare(
      a.pieces.begin(), a.pieces.end(), b.pieces.begin(), b.pieces.end(),
      [](const DecompositionPiece& x, const DecompositionPiece& y) { return x.key() < y.key(); });
}

std::vector<Decomposition> recovery_decode(std::string_view nonce, const Lexicon& lexicon,
                                           const DecodeParams& params) {
  if (params.min_piece_len < 2) throw InputError("min_piece_len must be >= 2");
  if (nonce.empty()) throw InputError("cannot decode an empty string");
  const auto& entries = lexicon.entries();
  const auto& concepts = lexicon.concepts();
  std::unordered_map<std::string, std::size_t> concept_index;
  for (std::size_t i = 0; i < concepts.size(); ++i) concept_index.emplace(concepts[i].id, i);

  // Every substring (>= min_piece_len) of every entry, with its occurrences.
  std::unordered_map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> occurrences;
  std::size_t longest = 0;
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const auto& w = entries[e].normalized;
    longest = std::max(longest, w.size());
    for (std::size_t s = 0; s < w.size(); ++s) {
      for (std::size_t len = params.min_piece_len; s + len <= w.size(); ++len) {
        occurrences[w.substr(s, len)].emplace_back(e, s);
      }
    }
  }

  const std::size_t n = nonce.size();
  std::vector<std::vector<PieceOption>> starting_at(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t len = params.min_piece_len; len <= longest && i + len <= n; ++len) {
      auto it = occurrences.find(std::string(nonce.substr(i, len)));
      if (it == occurrences.end()) continue;
      for (const auto& [e, s] : it->second) {
        starting_at[i].push_back({i, i + len, e, s, concept_index.at(entries[e].concept_id)});
      }
    }
    std::sort(starting_at[i].begin(), starting_at[i].end(), [](const PieceOption& a, const PieceOption& b) {
      return std::tie(a.begin, a.end, a.entry, a.source_begin) <
             std::tie(b.begin, b.end, b.entry, b.source_begin);
    });
  }

  std::vector<Decomposition> readings;
  for (std::size_t favoured = 0; favoured < concepts.size(); ++favoured) {
    auto value_of = [&](const PieceOption& p) {
      const long len = static_cast<long>(p.end - p.begin);
      return Value{len, p.concept_index == favoured ? len : 0, -1};
    };
    // best[i]: optimum over the suffix starting at i.
    std::vector<Value> best(n + 1);
    for (std::size_t i = n; i-- > 0;) {
      best[i] = best[i + 1];
      for (const auto& p : starting_at[i]) best[i] = std::max(best[i], value_of(p) + best[p.end]);
    }
    if (best[0].covered == 0) continue;

    // Smallest piece list (by key) that attains the optimum.
    Decomposition d;
    d.nonce = std::string(nonce);
    std::size_t pos = 0;
    Value target = best[0];
    while (target.covered > 0) {
      const PieceOption* chosen = nullptr;
      for (std::size_t s = pos; s < n && chosen == nullptr; ++s) {
        for (const auto& p : starting_at[s]) {
          if (value_of(p) + best[p.end] == target) {
            chosen = &p;
            break;
          }
        }
      }
      if (chosen == nullptr) throw Error("decoder reconstruction failed");
      const auto& entry = entries[chosen->entry];
      d.pieces.push_back({{chosen->begin, chosen->end},
                          chosen->entry,
                          chosen->source_begin,
                          std::string(nonce.substr(chosen->begin, chosen->end - chosen->begin)),
                          entry.concept_id,
                          entry.normalized});
      target = target - value_of(*chosen);
      pos = chosen->end;
    }
    finalize(d);
    readings.push_back(std::move(d));
  }

  std::sort(readings.begin(), readings.end(), ranks_before);
  std::vector<Decomposition> out;
  for (auto& r : readings) {
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const Decomposition& o) {
      return o.pieces.size() == r.pieces.size() &&
             std::equal(o.pieces.begin(), o.pieces.end(), r.pieces.begin(),
                        [](const DecompositionPiece& x, const DecompositionPiece& y) { return x.key() == y.key(); });
    });
    if (!duplicate) out.push_back(std::move(r));
    if (out.size() == params.top_k) break;
  }
  return out;
}

AuditAggregate aggregate_rows(const std::vector<AuditRow>& rows) {
  AuditAggregate agg;
  agg.rows = rows.size();
  if (rows.empty()) return agg;
  std::size_t bl_pass = 0;
  std::size_t wl_pass = 0;
  std::size_t recovered = 0;
  for (const auto& r : rows) {
    bl_pass += r.blacklist.passed ? 1 : 0;
    wl_pass += r.whitelist.passed ? 1 : 0;
    if (!r.recovered.empty() && (r.concept_id.empty() || r.recovered == r.concept_id)) ++recovered;
  }
  const auto total = static_cast<double>(rows.size());
  agg.blacklist_evasion_rate = static_cast<double>(bl_pass) / total;
  agg.whitelist_evasion_rate = static_cast<double>(wl_pass) / total;
  agg.recovery_rate = static_cast<double>(recovered) / total;
  return agg;
}

EvasionReport audit_run(const std::vector<AuditCandidate>& candidates, const Blacklist& bl,
                        const WhitelistVocabulary& wl, const Lexicon& lexicon,
                        const DecodeParams& decode, unsigned threads) {
  if (candidates.empty()) throw InputError("audit needs at least one candidate");
  EvasionReport report;
  report.blacklist_mode = std::string(to_string(bl.mode));
  report.rows.resize(candidates.size());

  auto process = [&](std::size_t i) {
    AuditRow& row = report.rows[i];
    row.text = candidates[i].text;
    row.concept_id = candidates[i].concept_id;
    try {
      row.blacklist = blacklist_filter(row.text, bl);
      row.whitelist = whitelist_filter(row.text, wl);
      std::string joined;
      for (const auto& t : prompt_tokens(row.text)) joined += t;
      if (joined.empty()) throw InputError("candidate has no decodable text");
      auto decoded = recovery_decode(joined, lexicon, decode);
      if (!decoded.empty()) {
        row.recovered = decoded.front().modal_concept;
        row.top = std::move(decoded.front());
      }
    } catch (const Error& e) {
      row.error = std::string(e.kind()) + ": " + e.what();
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, candidates.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < candidates.size(); ++i) process(i);
  } else {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        for (std::size_t i = t; i < candidates.size(); i += threads) process(i);
      });
    }
  }
  report.aggregate = aggregate_rows(report.rows);
  return report;
}

namespace {

nlohmann::ordered_json verdict_json(const FilterVerdict& v) {
  return {{"passed", v.passed}, {"reasons", v.reasons}};
}

FilterVerdict verdict_from(const nlohmann::json& j) {
  return {j.at("passed").get<bool>(), j.at("reasons").get<std::vector<std::string>>()};
}

}  // namespace

std::string report_to_json(const EvasionReport& report) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = EvasionReport::kSchemaVersion;
  doc["blacklist_mode"] = report.blacklist_mode;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json row;
    row["text"] = r.text;
    row["concept"] = r.concept_id;
    row["blacklist"] = verdict_json(r.blacklist);
    row["whitelist"] = verdict_json(r.whitelist);
    if (r.top) {
      auto pieces = nlohmann::ordered_json::array();
      for (const auto& p : r.top->pieces) {
        pieces.push_back({{"text", p.text},
                          {"span", {p.span.begin, p.span.end}},
                          {"source", p.source},
                          {"source_offset", p.source_begin},
                          {"concept", p.concept_id}});
      }
      row["decomposition"] = {{"nonce", r.top->nonce},
                              {"pieces", pieces},
                              {"coverage", r.top->coverage},
                              {"coherence", r.top->coherence}};
    } else {
      row["decomposition"] = nullptr;
    }
    row["recovered"] = r.recovered.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.recovered);
    if (!r.error.empty()) row["error"] = r.error;
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  doc["aggregate"] = {{"rows", report.aggregate.rows},
                      {"blacklist_evasion_rate", report.aggregate.blacklist_evasion_rate},
                      {"whitelist_evasion_rate", report.aggregate.whitelist_evasion_rate},
                      {"recovery_rate", report.aggregate.recovery_rate}};
  return doc.dump(2) + "\n";
}

EvasionReport report_from_json(std::string_view json) {
  EvasionReport report;
  try {
    const auto doc = nlohmann::json::parse(json);
    if (doc.at("schema_version").get<int>() != EvasionReport::kSchemaVersion) {
      throw InputError("unsupported report schema version");
    }
    report.blacklist_mode = doc.at("blacklist_mode").get<std::string>();
    for (const auto& r : doc.at("rows")) {
      AuditRow row;
      row.text = r.at("text").get<std::string>();
      row.concept_id = r.at("concept").get<std::string>();
      row.blacklist = verdict_from(r.at("blacklist"));
      row.whitelist = verdict_from(r.at("whitelist"));
      if (!r.at("recovered").is_null()) row.recovered = r.at("recovered").get<std::string>();
      if (r.contains("error")) row.error = r.at("error").get<std::string>();
      if (!r.at("decomposition").is_null()) {
        Decomposition d;
        d.nonce = r.at("decomposition").at("nonce").get<std::string>();
        for (const auto& p : r.at("decomposition").at("pieces")) {
          DecompositionPiece piece;
          piece.text = p.at("text").get<std::string>();
          piece.span = {p.at("span").at(0).get<std::size_t>(), p.at("span").at(1).get<std::size_t>()};
          piece.source = p.at("source").get<std::string>();
          piece.source_begin = p.at("source_offset").get<std::size_t>();
          piece.concept_id = p.at("concept").get<std::string>();
          d.pieces.push_back(std::move(piece));
        }
        finalize(d);
        row.top = std::move(d);
      }
      report.rows.push_back(std::move(row));
    }
    const auto& agg = doc.at("aggregate");
    report.aggregate.rows = agg.at("rows").get<std::size_t>();
    report.aggregate.blacklist_evasion_rate = agg.at("blacklist_evasion_rate").get<double>();
    report.aggregate.whitelist_evasion_rate = agg.at("whitelist_evasion_rate").get<double>();
    report.aggregate.recovery_rate = agg.at("recovery_rate").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed report: ") + e.what());
  }
  return report;
}

std::vector<AuditCandidate> load_candidates_jsonl(std::istream& in, const std::string& source) {
  std::vector<AuditCandidate> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      AuditCandidate c;
      c.text = j.at("text").get<std::string>();
      if (j.contains("concept") && j.at("concept").is_string()) c.concept_id = j.at("concept").get<std::string>();
      if (c.text.empty()) throw ParseError(source, line_no, "empty \"text\"");
      out.push_back(std::move(c));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(source, line_no, std::string("bad candidate line: ") + e.what());
    }
  }
  if (out.empty()) throw ParseError(source, line_no, "no candidates");
  return out;
}

}  // namespace glossoforge
