#pragma once

#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "themekit/matrix.hpp"

namespace themekit {

// Utterance-level vectors keyed by uid, one row per id.
struct EmbeddingMatrix {
  std::vector<std::string> ids;
  Matrix vectors;

  std::size_t size() const { return ids.size(); }
  std::size_t dim() const { return vectors.cols; }
  std::span<const double> row(std::size_t i) const { return vectors.row(i); }

  bool operator==(const EmbeddingMatrix&) const = default;
};

std::unordered_map<std::string, std::size_t> build_id_index(const EmbeddingMatrix& m);

// Token-level vectors for one text, as produced by a token-mode provider.
struct TokenEmbeddingSequence {
  std::vector<std::string> tokens;
  Matrix vectors;  // tokens.size() x dim
};

// u.v / (|u||v|). Zero vectors and dimension mismatches are domain errors;
// silent zeros would mask provider failures.
double cosine_similarity(std::span<const double> u, std::span<const double> v);
double cosine_distance(std::span<const double> u, std::span<const double> v);

// JSON-lines vector file: {"uid": "...", "vector": [f32, ...]} per line.
EmbeddingMatrix load_vectors(const std::string& path);
EmbeddingMatrix load_vectors_text(const std::string& text);
void save_vectors(const EmbeddingMatrix& m, const std::string& path);
std::string vectors_to_jsonl(const EmbeddingMatrix& m);

struct EmbeddingServiceConfig {
  std::string endpoint;  // e.g. "http://127.0.0.1:8080/embed"
  std::string auth_env = "THEMEKIT_EMBEDDING_TOKEN";
  int max_batch = 64;
  int max_retries = 3;
  int backoff_initial_ms = 100;
  double backoff_factor = 2.0;
  int timeout_sec = 30;
  int max_in_flight = 4;
};

struct FetchStats {
  std::size_t requests = 0;
  std::size_t retries = 0;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  // One row per input text, order preserved.
  virtual Matrix embed(const std::vector<std::string>& texts) = 0;

  virtual bool supports_tokens() const { return false; }
  // Throws TokenModeUnsupported unless supports_tokens().
  virtual TokenEmbeddingSequence embed_tokens(const std::string& text);
};

// Client for the HTTP embedding service. Requests are batched, retried with
// exponential backoff, and may run concurrently up to max_in_flight; results
// are assembled by index so concurrency never reorders output.
//
// Wire format: POST {"inputs": [text, ...]} -> {"vectors": [[f, ...], ...]},
// and with {"mode": "tokens"}: {"token_lists": [[tok, ...], ...],
// "token_vectors": [[[f, ...], ...], ...]}. A bearer token is attached from
// the environment variable named in the config, when set.
class HttpEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(EmbeddingServiceConfig config);
  ~HttpEmbeddingProvider() override;

  Matrix embed(const std::vector<std::string>& texts) override;
  bool supports_tokens() const override { return true; }
  TokenEmbeddingSequence embed_tokens(const std::string& text) override;

  FetchStats stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Convenience wrapper over HttpEmbeddingProvider. When ids are omitted the
// row index is used as the id.
EmbeddingMatrix fetch_vectors(const std::vector<std::string>& texts,
                              const EmbeddingServiceConfig& config,
                              std::vector<std::string> ids = {}, FetchStats* stats = nullptr);

}  // namespace themekit
