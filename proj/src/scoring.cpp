#include "glossoforge/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <httplib.h>
#include <json.hpp>

#include "glossoforge/unicode.hpp"

namespace glossoforge {
namespace {

std::set<std::string> char_ngrams(const std::string& text, std::size_t n) {
  const auto cps = unicode::code_points(text);
  std::set<std::string> grams;
  for (std::size_t i = 0; i + n <= cps.size(); ++i) {
    std::string g;
    for (std::size_t k = 0; k < n; ++k) g += cps[i + k];
    grams.insert(std::move(g));
  }
  return grams;
}

}  // namespace

ScoreResult score_ngram(const ScoreRequest& req, std::size_t n) {
  if (req.candidate.empty()) throw InputError("score request has an empty candidate");
  if (req.concept_gloss.empty()) throw InputError("score request has an empty gloss");
  if (n == 0) throw InputError("n-gram order must be positive");

  ScoreResult result;
  result.backend = "ngram" + std::to_string(n);
  const auto cand = char_ngrams(unicode::fold(req.candidate), n);
  std::set<std::string> reference;
  for (const auto& t : req.translations) reference.merge(char_ngrams(unicode::fold(t), n));
  std::size_t shared = 0;
  for (const auto& g : cand) shared += reference.contains(g) ? 1 : 0;
  result.detail["shared"] = std::to_string(shared);
  result.detail["candidate_ngrams"] = std::to_string(cand.size());
  result.score = cand.empty() ? 0.0 : static_cast<double>(shared) / static_cast<double>(cand.size());
  return result;
}

RemoteEndpoint parse_endpoint(const std::string& url) {
  constexpr std::string_view scheme = "http://";
  if (!url.starts_with(scheme)) {
    throw InputError("scorer endpoint must be an http:// URL: " + url);
  }
  std::string rest = url.substr(scheme.size());
  RemoteEndpoint ep;
  const auto slash = rest.find('/');
  if (slash != std::string::npos) {
    ep.path = rest.substr(slash);
    rest = rest.substr(0, slash);
  }
  const auto colon = rest.rfind(':');
  if (colon != std::string::npos) {
    const std::string port = rest.substr(colon + 1);
    rest = rest.substr(0, colon);
    if (port.empty() || !std::all_of(port.begin(), port.end(), ::isdigit) || port.size() > 5) {
      throw InputError("invalid port in scorer endpoint: " + url);
    }
    ep.port = std::stoi(port);
    if (ep.port <= 0 || ep.port > 65535) throw InputError("invalid port in scorer endpoint: " + url);
  }
  if (rest.empty()) throw InputError("missing host in scorer endpoint: " + url);
  ep.host = rest;
  return ep;
}

ScoreResult score_remote(const ScoreRequest& req, const RemoteEndpoint& endpoint,
                         std::chrono::milliseconds timeout) {
  if (req.candidate.empty() || req.concept_gloss.empty()) {
    throw InputError("score request needs a candidate and a gloss");
  }
  // One client per request: no state shared between concurrent calls.
  httplib::Client client(endpoint.host, endpoint.port);
  const auto secs = static_cast<time_t>(timeout.count() / 1000);
  const auto usecs = static_cast<time_t>((timeout.count() % 1000) * 1000);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  const nlohmann::json body = {{"candidate", req.candidate}, {"gloss", req.concept_gloss}};
  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(endpoint.path, body.dump(), "application/json");
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);

  const std::string where = endpoint.host + ":" + std::to_string(endpoint.port) + endpoint.path;
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::ConnectionTimeout ||
        (err == httplib::Error::Read && elapsed >= timeout * 9 / 10)) {
      throw RemoteTimeoutError("scorer at " + where + " timed out after " +
                               std::to_string(elapsed.count()) + " ms");
    }
    throw RemoteConnectionError("scorer at " + where + " failed: " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300) {
    throw RemoteResponseError("scorer at " + where + " returned HTTP " + std::to_string(res->status));
  }
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error&) {
    throw RemoteResponseError("scorer at " + where + " returned non-JSON body");
  }
  if (!reply.is_object() || !reply.contains("score") || !reply.at("score").is_number()) {
    throw RemoteResponseError("scorer at " + where + " reply lacks a numeric \"score\"");
  }
  const double raw = reply.at("score").get<double>();
  if (!std::isfinite(raw)) throw RemoteResponseError("scorer at " + where + " returned a non-finite score");

  ScoreResult result;
  result.backend = "remote:" + endpoint.host;
  result.score = std::clamp(raw, 0.0, 1.0);
  result.detail["latency_ms"] = std::to_string(elapsed.count());
  if (result.score != raw) {
    result.detail["clamped"] = "true";
    result.detail["raw_score"] = reply.at("score").dump();
  }
  return result;
}

}  // namespace glossoforge
