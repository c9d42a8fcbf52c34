#include "themekit/embeddings.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "themekit/errors.hpp"
#include "themekit/util.hpp"

namespace themekit {

using nlohmann::json;

std::unordered_map<std::string, std::size_t> build_id_index(const EmbeddingMatrix& m) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(m.ids.size());
  for (std::size_t i = 0; i < m.ids.size(); ++i) index.emplace(m.ids[i], i);
  return index;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DomainError("cosine_similarity: dimension mismatch");
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw DomainError("cosine_similarity: zero vector");
  return dot(u, v) / (nu * nv);
}

double cosine_distance(std::span<const double> u, std::span<const double> v) {
  return 1.0 - cosine_similarity(u, v);
}

TokenEmbeddingSequence EmbeddingProvider::embed_tokens(const std::string&) {
  throw TokenModeUnsupported("embedding provider does not support token mode");
}

EmbeddingMatrix load_vectors_text(const std::string& text) {
  EmbeddingMatrix out;
  std::unordered_map<std::string, std::size_t> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("vector file line " + std::to_string(line_no) + ": " + e.what(), e.byte);
    }
    if (!row.is_object() || !row.contains("uid") || !row.at("uid").is_string() ||
        !row.contains("vector") || !row.at("vector").is_array()) {
      throw FormatError("vector file line " + std::to_string(line_no) +
                        ": expected {\"uid\": ..., \"vector\": [...]}");
    }
    const std::string uid = row.at("uid").get<std::string>();
    if (!seen.emplace(uid, out.ids.size()).second) {
      throw IntegrityError("vector file: duplicate uid " + uid);
    }
    const auto& vec = row.at("vector");
    if (out.ids.empty()) {
      out.vectors.cols = vec.size();
    } else if (vec.size() != out.vectors.cols) {
      throw FormatError("vector file line " + std::to_string(line_no) + ": dimension " +
                        std::to_string(vec.size()) + " != " + std::to_string(out.vectors.cols));
    }
    if (vec.empty()) {
      throw FormatError("vector file line " + std::to_string(line_no) + ": empty vector");
    }
    for (const auto& v : vec) {
      if (!v.is_number()) {
        throw FormatError("vector file line " + std::to_string(line_no) +
                          ": non-finite or non-numeric component");
      }
      // Files carry 32-bit floats; math downstream is 64-bit.
      const double d = static_cast<double>(static_cast<float>(v.get<double>()));
      if (!std::isfinite(d)) {
        throw FormatError("vector file line " + std::to_string(line_no) +
                          ": non-finite component");
      }
      out.vectors.data.push_back(d);
    }
    out.ids.push_back(uid);
    out.vectors.rows = out.ids.size();
  }
  return out;
}

EmbeddingMatrix load_vectors(const std::string& path) {
  return load_vectors_text(read_file(path));
}

std::string vectors_to_jsonl(const EmbeddingMatrix& m) {
  std::string out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    json row;
    row["uid"] = m.ids[i];
    json vec = json::array();
    for (double v : m.row(i)) vec.push_back(static_cast<float>(v));
    row["vector"] = std::move(vec);
    out += row.dump();
    out += '\n';
  }
  return out;
}

void save_vectors(const EmbeddingMatrix& m, const std::string& path) {
  write_file(path, vectors_to_jsonl(m));
}

EmbeddingMatrix fetch_vectors(const std::vector<std::string>& texts,
                              const EmbeddingServiceConfig& config, std::vector<std::string> ids,
                              FetchStats* stats) {
  if (!ids.empty() && ids.size() != texts.size()) {
    throw DomainError("fetch_vectors: ids/texts size mismatch");
  }
  HttpEmbeddingProvider provider(config);
  EmbeddingMatrix out;
  out.vectors = provider.embed(texts);
  if (ids.empty()) {
    out.ids.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) out.ids.push_back(std::to_string(i));
  } else {
    out.ids = std::move(ids);
  }
  if (stats != nullptr) *stats = provider.stats();
  return out;
}

}  // namespace themekit
