#include "glossoforge/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "glossoforge/error.hpp"
#include "glossoforge/evocative.hpp"
#include "glossoforge/filter_audit.hpp"
#include "glossoforge/hybridizer.hpp"
#include "glossoforge/lexicon.hpp"
#include "glossoforge/scoring.hpp"
#include "glossoforge/tokenizer.hpp"

namespace glossoforge::cli {
namespace {

using ojson = nlohmann::ordered_json;

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return (v != nullptr && *v != '\0') ? std::string(v) : fallback;
}

std::vector<std::string> split_items(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << ojson{{"error", kind}, {"message", message}}.dump() << "\n";
}

// Writes to the --out path, or to the data stream for "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
    if (path != "-" && !path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*file_) throw InputError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : fallback_; }

 private:
  std::ostream& fallback_;
  std::unique_ptr<std::ofstream> file_;
};

struct Options {
  // shared
  std::string merges;
  std::string lexicon;
  std::string morphology;
  std::string out = "-";
  std::uint64_t seed = kDefaultSeed;

  // tokenize / classify / decode / blend
  std::vector<std::string> words;
  bool json = false;

  // forge
  std::string concept_id;
  std::string mode = "free";
  std::size_t min_languages = 2;
  std::size_t max_chunks = 5;
  std::size_t min_chunk_len = 2;
  std::size_t max_len = 25;
  std::size_t max_candidates = 1000;
  std::string languages;
  std::string score = "none";
  std::string scorer_url;
  int timeout_ms = 2000;

  // evoke
  std::string domain;
  std::size_t count = 20;
  std::string stems;
  std::string suffixes;
  std::string secondary_suffixes;

  // compose
  std::string template_text;
  std::vector<std::string> binds;

  // decode / audit
  std::size_t min_piece_len = 3;
  std::size_t top_k = 5;
  std::string candidates;
  std::string blacklist;
  std::vector<std::string> whitelists;
  std::string blacklist_mode = "exact";
  unsigned threads = 0;

  // blend
  std::size_t min_prefix = 2;
  std::size_t min_suffix = 3;
};

ojson segmentation_json(const TokenSegmentation& s) {
  return {{"word", s.word}, {"tokens", s.tokens}, {"boundaries", s.boundaries}};
}

ojson decomposition_json(const Decomposition& d) {
  auto pieces = ojson::array();
  for (const auto& p : d.pieces) {
    pieces.push_back({{"text", p.text},
                      {"span", {p.span.begin, p.span.end}},
                      {"source", p.source},
                      {"source_offset", p.source_begin},
                      {"concept", p.concept_id}});
  }
  return {{"pieces", pieces},
          {"coverage", d.coverage},
          {"coherence", d.coherence},
          {"concept", d.modal_concept}};
}

ojson evocative_json(const EvocativeCandidate& c) {
  auto parts = ojson::array();
  for (const auto& p : c.parts) {
    parts.push_back({{"slot", to_string(p.slot)}, {"text", p.text}, {"surface", p.surface}});
  }
  return {{"text", c.text}, {"surface", c.surface}, {"domain", c.domain}, {"parts", parts}, {"seed", c.seed}};
}

std::unique_ptr<Scorer> make_scorer(const Options& o) {
  if (o.score == "none") return nullptr;
  if (o.score == "ngram") return std::make_unique<NgramScorer>();
  const auto url = o.scorer_url.empty() ? env_or("GLOSSOFORGE_SCORER_URL", "") : o.scorer_url;
  if (url.empty()) throw InputError("remote scoring needs --scorer-url or GLOSSOFORGE_SCORER_URL");
  return std::make_unique<RemoteScorer>(parse_endpoint(url), std::chrono::milliseconds(o.timeout_ms));
}

void cmd_tokenize(const Options& o, std::ostream& out) {
  const auto table = load_merge_table_file(o.merges);
  Sink sink(o.out, out);
  for (const auto& w : o.words) {
    const auto s = segment(w, table);
    if (o.json) {
      sink.stream() << segmentation_json(s).dump() << "\n";
    } else {
      for (std::size_t i = 0; i < s.tokens.size(); ++i) sink.stream() << (i ? " " : "") << s.tokens[i];
      sink.stream() << "\n";
    }
  }
}

void cmd_lexicon_validate(const std::string& path, std::ostream& out) {
  const auto lex = load_lexicon_file(path);
  std::set<std::string> langs;
  for (const auto& e : lex.entries()) langs.insert(e.language);
  out << ojson{{"path", path},
               {"valid", true},
               {"concepts", lex.concepts().size()},
               {"entries", lex.entries().size()},
               {"languages", langs}}
             .dump()
      << "\n";
}

void cmd_forge(const Options& o, std::ostream& out) {
  const auto lex = load_lexicon_file(o.lexicon);
  HybridParams p;
  p.mode = parse_chunk_mode(o.mode);
  p.min_languages = o.min_languages;
  p.max_chunks = o.max_chunks;
  p.min_chunk_len = o.min_chunk_len;
  p.max_len = o.max_len;
  p.max_candidates = o.max_candidates;
  p.seed = o.seed;
  for (const auto& l : split_items(o.languages)) p.languages.insert(l);
  p.validate();

  std::vector<HybridCandidate> cands;
  if (p.mode == ChunkMode::token_aligned) {
    const auto table = load_merge_table_file(o.merges);
    cands = enumerate_token_aligned(lex, o.concept_id, p, table);
  } else {
    cands = enumerate_free_chunks(lex, o.concept_id, p);
  }

  Sink sink(o.out, out);
  const auto scorer = make_scorer(o);
  if (!scorer) {
    for (const auto& c : cands) sink.stream() << candidate_to_json(c) << "\n";
    return;
  }
  for (const auto& r : rank_candidates(cands, lex, *scorer)) {
    auto j = ojson::parse(candidate_to_json(r.candidate));
    if (r.score) {
      j["score"] = r.score->score;
      j["scorer"] = r.score->backend;
    } else {
      j["score"] = nullptr;
      j["score_error"] = r.error;
    }
    sink.stream() << j.dump() << "\n";
  }
}

void cmd_evoke(const Options& o, std::ostream& out) {
  const auto cfg = load_morphology(o.morphology);
  const auto& tmpl = cfg.at(o.domain);
  EvocativeParams p;
  p.count = o.count;
  p.seed = o.seed;
  p.stems = split_items(o.stems);
  p.suffixes = split_items(o.suffixes);
  p.secondary_suffixes = split_items(o.secondary_suffixes);
  LeakGuard guard;
  for (const auto& [domain, terms] : cfg.seed_lists) {
    for (const auto& t : terms) guard.add(t);
  }
  for (const auto& e : load_lexicon_file(o.lexicon).entries()) guard.add(e.normalized);
  Sink sink(o.out, out);
  for (const auto& c : generate(tmpl, p, guard)) sink.stream() << evocative_json(c).dump() << "\n";
}

void cmd_classify(const Options& o, std::ostream& out) {
  const auto cfg = load_morphology(o.morphology);
  const auto clf = MorphologyClassifier::train(cfg.seed_lists);
  Sink sink(o.out, out);
  for (const auto& w : o.words) {
    const auto post = clf.classify(w);
    ojson posterior = ojson::object();
    for (const auto& [d, v] : post) posterior[d] = v;
    sink.stream() << ojson{{"text", w}, {"domain", clf.argmax(w)}, {"posterior", posterior}}.dump() << "\n";
  }
}

void cmd_compose(const Options& o, std::ostream& out) {
  std::vector<std::pair<std::string, std::string>> bindings;
  for (const auto& b : o.binds) {
    const auto eq = b.find('=');
    if (eq == std::string::npos || eq == 0) throw InputError("binding must look like slot=value: " + b);
    bindings.emplace_back(b.substr(0, eq), b.substr(eq + 1));
  }
  Sink sink(o.out, out);
  sink.stream() << compose_sentence(o.template_text, bindings) << "\n";
}

void cmd_decode(const Options& o, std::ostream& out) {
  const auto lex = load_lexicon_file(o.lexicon);
  DecodeParams p{o.min_piece_len, o.top_k};
  Sink sink(o.out, out);
  for (const auto& w : o.words) {
    const auto nonce = normalize_word(w);
    const auto results = recovery_decode(nonce, lex, p);
    auto readings = ojson::array();
    for (const auto& d : results) readings.push_back(decomposition_json(d));
    sink.stream() << ojson{{"nonce", nonce},
                           {"concept", results.empty() ? ojson(nullptr) : ojson(results.front().modal_concept)},
                           {"decompositions", readings}}
                         .dump()
                  << "\n";
  }
}

void cmd_audit(const Options& o, std::ostream& out) {
  const auto lex = load_lexicon_file(o.lexicon);
  std::ifstream in(o.candidates, std::ios::binary);
  if (!in) throw InputError("cannot open candidates: " + o.candidates);
  const auto cands = load_candidates_jsonl(in, o.candidates);
  const auto bl = load_blacklist_file(o.blacklist, parse_blacklist_mode(o.blacklist_mode));
  WhitelistVocabulary wl;
  for (const auto& path : o.whitelists) wl.merge(load_whitelist_file(path));
  const auto report = audit_run(cands, bl, wl, lex, DecodeParams{o.min_piece_len, o.top_k}, o.threads);
  Sink sink(o.out, out);
  sink.stream() << report_to_json(report);
}

void cmd_blend(const Options& o, std::ostream& out) {
  if (o.words.size() != 2) throw InputError("blend takes exactly two words");
  Sink sink(o.out, out);
  for (const auto& b : portmanteau(o.words[0], o.words[1], BlendParams{o.min_prefix, o.min_suffix})) {
    sink.stream() << ojson{{"text", b.text}, {"prefix_len", b.prefix_len}, {"suffix_len", b.suffix_len}}.dump()
                  << "\n";
  }
}

}  // namespace

std::string data_path(const std::string& relative) {
  const auto dir = env_or("GLOSSOFORGE_DATA_DIR", GLOSSOFORGE_DEFAULT_DATA_DIR);
  return (std::filesystem::path(dir) / relative).string();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  o.merges = env_or("GLOSSOFORGE_MERGES", data_path("merges/clip_bpe_merges.txt"));
  o.lexicon = data_path("lexicon.tsv");
  o.morphology = data_path("morphology.json");
  std::string lexicon_path;

  CLI::App app{"glossoforge: macaronic and evocative prompt construction and moderation audits", "glossoforge"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output path, - for stdout")->capture_default_str();
  };
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", o.seed, "RNG seed")->capture_default_str(); };

  auto* tokenize = app.add_subcommand("tokenize", "BPE-segment words with a merge table");
  tokenize->add_option("words", o.words, "Words to segment")->required();
  tokenize->add_option("--merges", o.merges, "Merge table (env GLOSSOFORGE_MERGES)")->capture_default_str();
  tokenize->add_flag("--json", o.json, "One JSON object per word");
  add_out(tokenize);

  auto* lexicon = app.add_subcommand("lexicon", "Lexicon utilities");
  lexicon->require_subcommand(1);
  auto* validate = lexicon->add_subcommand("validate", "Parse and validate a lexicon file");
  validate->add_option("path", lexicon_path, "Lexicon (.tsv or .json)")->required();

  auto* forge = app.add_subcommand("forge", "Enumerate macaronic hybrids for a concept");
  forge->add_option("--concept", o.concept_id, "Concept id")->required();
  forge->add_option("--mode", o.mode, "token|free")->check(CLI::IsMember({"token", "free"}))->capture_default_str();
  forge->add_option("--min-languages", o.min_languages, "Distinct languages required")->capture_default_str();
  forge->add_option("--max-chunks", o.max_chunks, "Chunks per hybrid")->capture_default_str();
  forge->add_option("--min-chunk-len", o.min_chunk_len, "Minimum chunk length")->capture_default_str();
  forge->add_option("--max-len", o.max_len, "Maximum hybrid length")->capture_default_str();
  forge->add_option("--max-candidates", o.max_candidates, "Sample when the space is larger")->capture_default_str();
  forge->add_option("--languages", o.languages, "Comma-separated language codes (default: all)");
  forge->add_option("--lexicon", o.lexicon, "Lexicon file")->capture_default_str();
  forge->add_option("--merges", o.merges, "Merge table for token mode (env GLOSSOFORGE_MERGES)")->capture_default_str();
  forge->add_option("--score", o.score, "none|ngram|remote")
      ->check(CLI::IsMember({"none", "ngram", "remote"}))
      ->capture_default_str();
  forge->add_option("--scorer-url", o.scorer_url, "Remote scorer URL (env GLOSSOFORGE_SCORER_URL)");
  forge->add_option("--timeout-ms", o.timeout_ms, "Remote scorer timeout")->capture_default_str();
  add_seed(forge);
  add_out(forge);

  auto* evoke = app.add_subcommand("evoke", "Generate evocative nonce words");
  evoke->add_option("--domain", o.domain, "taxonomy|pharma|toponym:de|toponym:it|toponym:fr")->required();
  evoke->add_option("--count", o.count, "Number of candidates")->capture_default_str();
  evoke->add_option("--stems", o.stems, "Comma-separated taxonomy stems");
  evoke->add_option("--suffixes", o.suffixes, "Comma-separated suffixes replacing the template's");
  evoke->add_option("--secondary-suffixes", o.secondary_suffixes,
                    "Comma-separated second-word suffixes replacing the template's");
  evoke->add_option("--morphology", o.morphology, "Morphology config")->capture_default_str();
  evoke->add_option("--lexicon", o.lexicon, "Lexicon whose words are never emitted")->capture_default_str();
  add_seed(evoke);
  add_out(evoke);

  auto* classify = app.add_subcommand("classify", "Classify strings by domain morphology");
  classify->add_option("strings", o.words, "Strings to classify")->required();
  classify->add_option("--morphology", o.morphology, "Morphology config")->capture_default_str();
  add_out(classify);

  auto* compose = app.add_subcommand("compose", "Fill a prompt template");
  compose->add_option("--template", o.template_text, "Template with {slot} placeholders")->required();
  compose->add_option("--bind", o.binds, "slot=value, repeatable");
  add_out(compose);

  auto* decode = app.add_subcommand("decode", "Recover concepts from nonce strings");
  decode->add_option("nonces", o.words, "Nonce strings")->required();
  decode->add_option("--lexicon", o.lexicon, "Lexicon file")->capture_default_str();
  decode->add_option("--min-piece-len", o.min_piece_len, "Minimum piece length")->capture_default_str();
  decode->add_option("--top-k", o.top_k, "Readings to report")->capture_default_str();
  add_out(decode);

  auto* audit = app.add_subcommand("audit", "Run filters and recovery over candidates");
  audit->add_option("--candidates", o.candidates, "Candidate JSONL")->required();
  audit->add_option("--blacklist", o.blacklist, "Blacklist file")->required();
  audit->add_option("--whitelist", o.whitelists, "Whitelist vocabulary file, repeatable")->required();
  audit->add_option("--lexicon", o.lexicon, "Lexicon file")->capture_default_str();
  audit->add_option("--blacklist-mode", o.blacklist_mode, "exact|substring")
      ->check(CLI::IsMember({"exact", "substring"}))
      ->capture_default_str();
  audit->add_option("--min-piece-len", o.min_piece_len, "Minimum piece length")->capture_default_str();
  audit->add_option("--threads", o.threads, "Worker threads, 0 = auto")->capture_default_str();
  add_out(audit);

  auto* blend = app.add_subcommand("blend", "Portmanteau blends of two words");
  blend->add_option("words", o.words, "Two words")->required()->expected(2);
  blend->add_option("--min-prefix", o.min_prefix, "Shortest prefix")->capture_default_str();
  blend->add_option("--min-suffix", o.min_suffix, "Shortest suffix")->capture_default_str();
  add_out(blend);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage_error", e.what());
    return kUsageError;
  }

  try {
    if (tokenize->parsed()) cmd_tokenize(o, out);
    else if (validate->parsed()) cmd_lexicon_validate(lexicon_path, out);
    else if (forge->parsed()) cmd_forge(o, out);
    else if (evoke->parsed()) cmd_evoke(o, out);
    else if (classify->parsed()) cmd_classify(o, out);
    else if (compose->parsed()) cmd_compose(o, out);
    else if (decode->parsed()) cmd_decode(o, out);
    else if (audit->parsed()) cmd_audit(o, out);
    else if (blend->parsed()) cmd_blend(o, out);
  } catch (const Error& e) {
    report_error(err, e.kind(), e.what());
    return kDomainError;
  } catch (const std::exception& e) {
    report_error(err, "internal_error", e.what());
    return kDomainError;
  }
  out.flush();
  return kSuccess;
}

}  // namespace glossoforge::cli
