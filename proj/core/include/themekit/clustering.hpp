#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "themekit/embeddings.hpp"
#include "themekit/matrix.hpp"

namespace themekit {

struct ClusteringConfig {
  int k = 10;
  std::uint64_t seed = 0;
  int max_iters = 300;
  double tol = 1e-6;       // convergence: max centroid displacement
  bool normalize = false;  // unit-normalize rows first (cosine-like geometry)
};

struct ClusterAssignment {
  std::vector<std::string> ids;  // same order as the input matrix
  std::vector<int> labels;       // parallel to ids, values in [0, k)
  Matrix centroids;              // k x d
  double inertia = 0.0;
  std::vector<double> inertia_history;  // non-increasing, one entry per assignment pass

  int k() const { return static_cast<int>(centroids.rows); }
  std::unordered_map<std::string, int> label_map() const;
};

// k-means++ seeding: first centroid uniform, each next one drawn with
// probability proportional to the squared distance to the nearest chosen
// centroid. Deterministic given the seed.
Matrix kmeans_pp_init(const EmbeddingMatrix& points, int k, std::uint64_t seed);

// Lloyd iterations until the centroid shift drops below tol or max_iters is
// hit. Ties in the assignment step break toward the lower cluster id. Empty
// clusters are repaired by re-seeding them at the farthest point of the
// largest cluster, so k never silently shrinks mid-run.
ClusterAssignment kmeans(const EmbeddingMatrix& points, const ClusteringConfig& config);

// Cluster ids ordered by ascending distance from point; ties toward lower id.
std::vector<int> rank_centroids(std::span<const double> point, const Matrix& centroids);
// DomainError when fewer than 2 centroids exist.
int second_closest_centroid(std::span<const double> point, const Matrix& centroids);

enum class DistanceMetric { Euclidean, Cosine };

// Mean over points of (b - a) / max(a, b); singleton-cluster points score 0.
// DomainError unless at least 2 distinct clusters are present.
double silhouette_score(const EmbeddingMatrix& points, std::span<const int> labels,
                        DistanceMetric metric = DistanceMetric::Euclidean);

struct KSelection {
  int k = 0;
  struct Entry {
    int k = 0;
    std::optional<double> silhouette;  // empty when the run degenerated to one cluster
  };
  std::vector<Entry> table;
};

// Runs kmeans for each k in [k_min, k_max] and keeps the silhouette-maximal
// one; ties go to the smaller k.
KSelection select_k(const EmbeddingMatrix& points, int k_min, int k_max,
                    const ClusteringConfig& base_config);

nlohmann::json assignment_to_json(const ClusterAssignment& assignment);
ClusterAssignment assignment_from_json(const nlohmann::json& j);
void save_assignment(const ClusterAssignment& assignment, const std::string& path);
ClusterAssignment load_assignment(const std::string& path);

}  // namespace themekit
