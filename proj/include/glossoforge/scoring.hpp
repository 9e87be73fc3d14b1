#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "glossoforge/error.hpp"

namespace glossoforge {

struct ScoreRequest {
  std::string candidate;
  std::string concept_gloss;
  std::vector<std::string> translations;  // normalized words
};

struct ScoreResult {
  double score = 0.0;  // always in [0, 1]
  std::string backend;
  std::map<std::string, std::string> detail;
};

class ScoringError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "scoring_error"; }
};

class RemoteTimeoutError : public ScoringError {
 public:
  using ScoringError::ScoringError;
  const char* kind() const noexcept override { return "remote_timeout"; }
};

class RemoteConnectionError : public ScoringError {
 public:
  using ScoringError::ScoringError;
  const char* kind() const noexcept override { return "remote_connection"; }
};

class RemoteResponseError : public ScoringError {
 public:
  using ScoringError::ScoringError;
  const char* kind() const noexcept override { return "remote_malformed_response"; }
};

// Candidate-to-concept similarity. Implementations must be safe to call
// concurrently.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual ScoreResult score(const ScoreRequest& req) const = 0;
  virtual std::string id() const = 0;
};

// Fraction of the candidate's distinct character n-grams that also occur in
// some translation. Zero when the candidate has no n-gram.
ScoreResult score_ngram(const ScoreRequest& req, std::size_t n = 3);

struct RemoteEndpoint {
  std::string host;
  int port = 80;
  std::string path = "/";
};

// Parses "http://host[:port][/path]". Throws InputError otherwise.
RemoteEndpoint parse_endpoint(const std::string& url);

// POSTs {"candidate", "gloss"} and reads {"score"}; scores outside [0,1]
// are clamped and flagged in detail["clamped"].
ScoreResult score_remote(const ScoreRequest& req, const RemoteEndpoint& endpoint,
                         std::chrono::milliseconds timeout);

class NgramScorer final : public Scorer {
 public:
  explicit NgramScorer(std::size_t n = 3) : n_(n) {}
  ScoreResult score(const ScoreRequest& req) const override { return score_ngram(req, n_); }
  std::string id() const override { return "ngram" + std::to_string(n_); }

 private:
  std::size_t n_;
};

class RemoteScorer final : public Scorer {
 public:
  RemoteScorer(RemoteEndpoint endpoint, std::chrono::milliseconds timeout)
      : endpoint_(std::move(endpoint)), timeout_(timeout) {}
  ScoreResult score(const ScoreRequest& req) const override {
    return score_remote(req, endpoint_, timeout_);
  }
  std::string id() const override { return "remote:" + endpoint_.host; }

 private:
  RemoteEndpoint endpoint_;
  std::chrono::milliseconds timeout_;
};

}  // namespace glossoforge
