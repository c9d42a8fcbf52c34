#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <string>
#include <vector>

#include "themekit/embeddings.hpp"
#include "themekit/labeling.hpp"

namespace themekit {

// Deterministic in-process providers for hermetic runs and tests. The same
// text always embeds to the same unit vector, so pipelines driven by these
// mocks replay bit-identically.

struct MockEmbeddingConfig {
  std::size_t dim = 16;
  std::uint64_t seed = 0x7E3EBEEF;
  bool token_mode = true;  // disable to exercise the bertscore-skip path
};

class MockEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit MockEmbeddingProvider(MockEmbeddingConfig config = {});

  Matrix embed(const std::vector<std::string>& texts) override;
  bool supports_tokens() const override { return config_.token_mode; }
  TokenEmbeddingSequence embed_tokens(const std::string& text) override;

  // Unit-norm vector derived from the text content alone.
  static std::vector<double> vector_for(const std::string& text, std::size_t dim,
                                        std::uint64_t seed);

 private:
  MockEmbeddingConfig config_;
};

// Chat mock. Scripted responses (FIFO) take priority; otherwise labeling
// prompts get a deterministic content-derived label and judge prompts get a
// pass verdict. All calls are recorded for assertions.
class MockChatClient : public ChatClient {
 public:
  std::string complete(const std::vector<ChatMessage>& messages) override;

  void push_response(std::string response);
  std::vector<std::vector<ChatMessage>> calls() const;

 private:
  mutable std::mutex mutex_;
  std::deque<std::string> scripted_;
  std::vector<std::vector<ChatMessage>> calls_;
};

}  // namespace themekit
