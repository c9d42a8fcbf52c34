// HTTP transport for the embedding and chat providers. Shared plumbing:
// endpoint splitting, bearer auth from the environment, retries with
// exponential backoff.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "themekit/embeddings.hpp"
#include "themekit/errors.hpp"
#include "themekit/labeling.hpp"
#include "themekit/util.hpp"

namespace themekit {

using nlohmann::json;

namespace {

struct Endpoint {
  std::string base;  // scheme://host:port
  std::string path;  // /embed
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint must be an http(s) URL: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  if (path_start == std::string::npos) {
    ep.base = url;
    ep.path = "/";
  } else {
    ep.base = url.substr(0, path_start);
    ep.path = url.substr(path_start);
  }
  return ep;
}

httplib::Headers auth_headers(const std::string& auth_env) {
  httplib::Headers headers;
  if (!auth_env.empty()) {
    if (const char* token = std::getenv(auth_env.c_str()); token != nullptr && *token != '\0') {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }
  return headers;
}

struct PostResult {
  int status = 0;
  std::string body;
};

// POSTs JSON with retries. Retries cover transport failures and 5xx/429;
// other statuses are returned to the caller for protocol-level handling.
template <typename RetryCounter>
PostResult post_with_retries(const Endpoint& ep, const httplib::Headers& headers,
                             const std::string& body, int timeout_sec, int max_retries,
                             int backoff_initial_ms, double backoff_factor,
                             RetryCounter&& on_retry) {
  std::string last_error;
  double backoff = backoff_initial_ms;
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    if (attempt > 0) {
      on_retry();
      std::this_thread::sleep_for(
          std::chrono::milliseconds(static_cast<long>(backoff)));
      backoff *= backoff_factor;
    }
    httplib::Client client(ep.base);
    client.set_connection_timeout(timeout_sec, 0);
    client.set_read_timeout(timeout_sec, 0);
    client.set_write_timeout(timeout_sec, 0);
    auto res = client.Post(ep.path, headers, body, "application/json");
    if (!res) {
      last_error = "transport failure (" + httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status >= 500 || res->status == 429) {
      last_error = "server returned status " + std::to_string(res->status);
      continue;
    }
    return {res->status, res->body};
  }
  throw ProviderError("request to " + ep.base + ep.path + " failed after " +
                      std::to_string(max_retries + 1) + " attempts: " + last_error);
}

}  // namespace

// ---------------------------------------------------------------------------
// HttpEmbeddingProvider

struct HttpEmbeddingProvider::Impl {
  EmbeddingServiceConfig config;
  Endpoint endpoint;
  std::atomic<std::size_t> requests{0};
  std::atomic<std::size_t> retries{0};

  explicit Impl(EmbeddingServiceConfig cfg)
      : config(std::move(cfg)), endpoint(split_endpoint(config.endpoint)) {}

  json post(const json& request) {
    requests.fetch_add(1);
    const PostResult res = post_with_retries(
        endpoint, auth_headers(config.auth_env), request.dump(), config.timeout_sec,
        config.max_retries, config.backoff_initial_ms, config.backoff_factor,
        [this] { retries.fetch_add(1); });
    if (res.status == 400 && request.contains("mode") && request["mode"] == "tokens") {
      throw TokenModeUnsupported("embedding service rejected token mode: " + res.body);
    }
    if (res.status != 200) {
      throw ProviderError("embedding service returned status " + std::to_string(res.status) +
                          ": " + res.body);
    }
    try {
      return json::parse(res.body);
    } catch (const json::parse_error& e) {
      throw ProviderError(std::string("embedding service returned invalid JSON: ") + e.what());
    }
  }
};

HttpEmbeddingProvider::HttpEmbeddingProvider(EmbeddingServiceConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpEmbeddingProvider::~HttpEmbeddingProvider() = default;

FetchStats HttpEmbeddingProvider::stats() const {
  return {impl_->requests.load(), impl_->retries.load()};
}

Matrix HttpEmbeddingProvider::embed(const std::vector<std::string>& texts) {
  if (texts.empty()) return {};
  const std::size_t batch = std::max(1, impl_->config.max_batch);
  const std::size_t chunks = (texts.size() + batch - 1) / batch;
  std::vector<Matrix> parts(chunks);

  parallel_for_indexed(chunks, impl_->config.max_in_flight, [&](std::size_t c) {
    const std::size_t begin = c * batch;
    const std::size_t end = std::min(texts.size(), begin + batch);
    json request;
    request["inputs"] = json(std::vector<std::string>(texts.begin() + begin, texts.begin() + end));
    const json response = impl_->post(request);
    if (!response.contains("vectors") || !response["vectors"].is_array()) {
      throw ProviderError("embedding response missing \"vectors\"");
    }
    const auto& vectors = response["vectors"];
    if (vectors.size() != end - begin) {
      throw ProviderError("embedding service returned " + std::to_string(vectors.size()) +
                          " vectors for " + std::to_string(end - begin) + " inputs");
    }
    Matrix part;
    for (const auto& vec : vectors) {
      if (!vec.is_array() || vec.empty()) throw ProviderError("embedding response: bad vector");
      if (part.cols == 0) part.cols = vec.size();
      if (vec.size() != part.cols) throw ProviderError("embedding response: ragged vectors");
      for (const auto& v : vec) {
        if (!v.is_number()) throw ProviderError("embedding response: non-numeric component");
        part.data.push_back(v.get<double>());
      }
      ++part.rows;
    }
    parts[c] = std::move(part);
  });

  Matrix out;
  for (Matrix& part : parts) {
    if (out.cols == 0) out.cols = part.cols;
    if (part.cols != out.cols) throw ProviderError("embedding response: inconsistent dimensions");
    out.data.insert(out.data.end(), part.data.begin(), part.data.end());
    out.rows += part.rows;
  }
  return out;
}

TokenEmbeddingSequence HttpEmbeddingProvider::embed_tokens(const std::string& text) {
  json request;
  request["inputs"] = json::array({text});
  request["mode"] = "tokens";
  const json response = impl_->post(request);
  if (!response.contains("token_lists") || !response.contains("token_vectors")) {
    throw ProviderError("token response missing \"token_lists\"/\"token_vectors\"");
  }
  const auto& lists = response["token_lists"];
  const auto& vecs = response["token_vectors"];
  if (!lists.is_array() || lists.size() != 1 || !vecs.is_array() || vecs.size() != 1) {
    throw ProviderError("token response: expected exactly one entry");
  }
  TokenEmbeddingSequence seq;
  seq.tokens = lists[0].get<std::vector<std::string>>();
  for (const auto& vec : vecs[0]) {
    if (!vec.is_array() || vec.empty()) throw ProviderError("token response: bad vector");
    if (seq.vectors.cols == 0) seq.vectors.cols = vec.size();
    if (vec.size() != seq.vectors.cols) throw ProviderError("token response: ragged vectors");
    for (const auto& v : vec) seq.vectors.data.push_back(v.get<double>());
    ++seq.vectors.rows;
  }
  if (seq.tokens.size() != seq.vectors.rows) {
    throw ProviderError("token response: token/vector count mismatch");
  }
  return seq;
}

// ---------------------------------------------------------------------------
// HttpChatClient

struct HttpChatClient::Impl {
  ChatServiceConfig config;
  Endpoint endpoint;

  explicit Impl(ChatServiceConfig cfg)
      : config(std::move(cfg)), endpoint(split_endpoint(config.endpoint)) {}
};

HttpChatClient::HttpChatClient(ChatServiceConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpChatClient::~HttpChatClient() = default;

std::string HttpChatClient::complete(const std::vector<ChatMessage>& messages) {
  json request;
  request["model"] = impl_->config.model;
  request["temperature"] = impl_->config.temperature;
  json jmessages = json::array();
  for (const ChatMessage& m : messages) {
    jmessages.push_back({{"role", m.role}, {"content", m.content}});
  }
  request["messages"] = std::move(jmessages);

  const PostResult res = post_with_retries(
      impl_->endpoint, auth_headers(impl_->config.auth_env), request.dump(),
      impl_->config.timeout_sec, impl_->config.max_retries, impl_->config.backoff_initial_ms,
      impl_->config.backoff_factor, [] {});
  if (res.status != 200) {
    throw ProviderError("chat service returned status " + std::to_string(res.status) + ": " +
                        res.body);
  }
  json response;
  try {
    response = json::parse(res.body);
  } catch (const json::parse_error& e) {
    throw ProviderError(std::string("chat service returned invalid JSON: ") + e.what());
  }
  if (response.contains("choices") && response["choices"].is_array() &&
      !response["choices"].empty()) {
    const auto& first = response["choices"][0];
    if (first.contains("message") && first["message"].contains("content")) {
      return first["message"]["content"].get<std::string>();
    }
  }
  if (response.contains("content") && response["content"].is_string()) {
    return response["content"].get<std::string>();
  }
  throw ProviderError("chat response carries no message content");
}

}  // namespace themekit
