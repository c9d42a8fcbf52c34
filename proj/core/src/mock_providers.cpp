#include "themekit/mock_providers.hpp"

#include <cmath>

#include "themekit/errors.hpp"
#include "themekit/evaluation.hpp"
#include "themekit/rng.hpp"

namespace themekit {

MockEmbeddingProvider::MockEmbeddingProvider(MockEmbeddingConfig config) : config_(config) {
  if (config_.dim == 0) throw ConfigError("mock embedding dim must be positive");
}

std::vector<double> MockEmbeddingProvider::vector_for(const std::string& text, std::size_t dim,
                                                      std::uint64_t seed) {
  Rng rng(seed ^ detail::fnv1a64(text));
  std::vector<double> v(dim);
  double norm_sq = 0.0;
  for (double& x : v) {
    x = 2.0 * rng.next_double() - 1.0;
    norm_sq += x * x;
  }
  if (norm_sq == 0.0) {
    v[0] = 1.0;
    return v;
  }
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& x : v) x *= inv;
  return v;
}

Matrix MockEmbeddingProvider::embed(const std::vector<std::string>& texts) {
  Matrix out(texts.size(), config_.dim);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const std::vector<double> v = vector_for(texts[i], config_.dim, config_.seed);
    std::copy(v.begin(), v.end(), out.row(i).begin());
  }
  return out;
}

TokenEmbeddingSequence MockEmbeddingProvider::embed_tokens(const std::string& text) {
  if (!config_.token_mode) {
    throw TokenModeUnsupported("mock embedding provider configured without token mode");
  }
  TokenEmbeddingSequence seq;
  seq.tokens = rouge_tokenize(text);
  if (seq.tokens.empty()) seq.tokens.push_back(text);
  seq.vectors = Matrix(seq.tokens.size(), config_.dim);
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    const std::vector<double> v = vector_for(seq.tokens[i], config_.dim, config_.seed);
    std::copy(v.begin(), v.end(), seq.vectors.row(i).begin());
  }
  return seq;
}

namespace {

// Deterministic label from the first utterance in the prompt block.
std::string derived_label(const std::string& prompt) {
  const auto block = extract_tag(prompt, "utterances");
  std::string first_line;
  if (block) {
    std::string content = *block;
    std::size_t begin = content.find_first_not_of("\r\n");
    if (begin != std::string::npos) {
      std::size_t end = content.find('\n', begin);
      first_line = content.substr(begin, end == std::string::npos ? std::string::npos : end - begin);
    }
  }
  std::vector<std::string> tokens = rouge_tokenize(first_line);
  std::string label = "discuss";
  for (std::size_t i = 0; i < tokens.size() && i < 2; ++i) {
    label += " " + tokens[i];
  }
  return label;
}

}  // namespace

std::string MockChatClient::complete(const std::vector<ChatMessage>& messages) {
  std::lock_guard<std::mutex> lock(mutex_);
  calls_.push_back(messages);
  if (!scripted_.empty()) {
    std::string response = std::move(scripted_.front());
    scripted_.pop_front();
    return response;
  }

  const std::string* user = nullptr;
  for (const ChatMessage& m : messages) {
    if (m.role == "user") user = &m.content;
  }
  if (user != nullptr && user->find("<rubric") != std::string::npos) {
    return "<verdict>pass</verdict>";
  }
  if (user != nullptr && user->find("<utterances>") != std::string::npos) {
    const std::string label = derived_label(*user);
    return "<theme_label_explanation>\nThe utterances share one request.\n"
           "</theme_label_explanation>\n<theme_label>\n" +
           label + "\n</theme_label>";
  }
  return "<theme_label>discuss request</theme_label>";
}

void MockChatClient::push_response(std::string response) {
  std::lock_guard<std::mutex> lock(mutex_);
  scripted_.push_back(std::move(response));
}

std::vector<std::vector<ChatMessage>> MockChatClient::calls() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return calls_;
}

}  // namespace themekit
