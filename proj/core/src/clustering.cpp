#include "themekit/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "themekit/errors.hpp"
#include "themekit/rng.hpp"
#include "themekit/util.hpp"

namespace themekit {

using nlohmann::json;

namespace {

Matrix normalized_rows(const Matrix& m) {
  Matrix out = m;
  for (std::size_t i = 0; i < out.rows; ++i) {
    auto row = out.row(i);
    const double n = norm(row);
    if (n == 0.0) throw DomainError("cannot unit-normalize a zero vector (row " + std::to_string(i) + ")");
    for (double& v : row) v /= n;
  }
  return out;
}

int nearest_centroid(std::span<const double> point, const Matrix& centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows; ++c) {
    const double d = squared_distance(point, centroids.row(c));
    if (d < best_d) {  // strict: ties keep the lower id
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

std::unordered_map<std::string, int> ClusterAssignment::label_map() const {
  std::unordered_map<std::string, int> map;
  map.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) map.emplace(ids[i], labels[i]);
  return map;
}

Matrix kmeans_pp_init(const EmbeddingMatrix& points, int k, std::uint64_t seed) {
  const std::size_t n = points.size();
  if (k < 1) throw ConfigError("kmeans++: k must be positive");
  if (static_cast<std::size_t>(k) > n) {
    throw ConfigError("kmeans++: k (" + std::to_string(k) + ") exceeds point count (" +
                      std::to_string(n) + ")");
  }

  Rng rng(seed);
  std::vector<std::size_t> chosen;
  std::vector<char> is_chosen(n, 0);
  std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());

  const std::size_t first = rng.uniform_index(n);
  chosen.push_back(first);
  is_chosen[first] = 1;
  for (std::size_t i = 0; i < n; ++i) {
    min_sq[i] = squared_distance(points.row(i), points.row(first));
  }

  while (chosen.size() < static_cast<std::size_t>(k)) {
    const double total = std::accumulate(min_sq.begin(), min_sq.end(), 0.0);
    std::size_t pick;
    if (total > 0.0) {
      pick = weighted_index(rng, min_sq);
    } else {
      // Every remaining point duplicates a chosen centroid; fall back to a
      // uniform pick among the unchosen so k centroids still come back.
      std::vector<std::size_t> unchosen;
      for (std::size_t i = 0; i < n; ++i) {
        if (!is_chosen[i]) unchosen.push_back(i);
      }
      pick = unchosen[rng.uniform_index(unchosen.size())];
    }
    chosen.push_back(pick);
    is_chosen[pick] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      min_sq[i] = std::min(min_sq[i], squared_distance(points.row(i), points.row(pick)));
    }
  }

  Matrix centroids(k, points.dim());
  for (int c = 0; c < k; ++c) {
    const auto src = points.row(chosen[c]);
    std::copy(src.begin(), src.end(), centroids.row(c).begin());
  }
  return centroids;
}

ClusterAssignment kmeans(const EmbeddingMatrix& points, const ClusteringConfig& config) {
  const std::size_t n = points.size();
  if (n == 0) throw ConfigError("kmeans: empty input");
  if (config.max_iters < 1) throw ConfigError("kmeans: max_iters must be >= 1");
  if (config.tol < 0.0) throw ConfigError("kmeans: tol must be non-negative");

  EmbeddingMatrix work;
  const EmbeddingMatrix* input = &points;
  if (config.normalize) {
    work.ids = points.ids;
    work.vectors = normalized_rows(points.vectors);
    input = &work;
  }

  const int k = config.k;
  Matrix centroids = kmeans_pp_init(*input, k, config.seed);
  const std::size_t dim = input->dim();

  ClusterAssignment result;
  result.ids = input->ids;
  result.labels.assign(n, 0);

  auto assign_pass = [&](double* inertia_out) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = nearest_centroid(input->row(i), centroids);
      result.labels[i] = c;
      inertia += squared_distance(input->row(i), centroids.row(c));
    }
    *inertia_out = inertia;
  };

  for (int iter = 0; iter < config.max_iters; ++iter) {
    double inertia = 0.0;
    assign_pass(&inertia);
    result.inertia_history.push_back(inertia);

    // Update step: per-cluster means, accumulated in point order so the
    // reduction is deterministic.
    Matrix next(k, dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const int c = result.labels[i];
      auto row = next.row(c);
      const auto p = input->row(i);
      for (std::size_t d = 0; d < dim; ++d) row[d] += p[d];
      ++counts[c];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      auto row = next.row(c);
      for (std::size_t d = 0; d < dim; ++d) row[d] /= static_cast<double>(counts[c]);
    }

    // Empty-cluster repair: re-seed at the farthest point of the largest
    // cluster and take that point with it.
    for (int c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      int donor = -1;
      std::size_t donor_size = 1;  // needs at least 2 members to give one away
      for (int d = 0; d < k; ++d) {
        if (counts[d] > donor_size) {
          donor = d;
          donor_size = counts[d];
        }
      }
      if (donor < 0) {
        // No cluster can donate; keep the stale centroid position.
        const auto old_row = centroids.row(c);
        std::copy(old_row.begin(), old_row.end(), next.row(c).begin());
        continue;
      }
      std::size_t farthest = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (result.labels[i] != donor) continue;
        const double d = squared_distance(input->row(i), next.row(donor));
        if (d > far_d) {
          far_d = d;
          farthest = i;
        }
      }
      const auto p = input->row(farthest);
      std::copy(p.begin(), p.end(), next.row(c).begin());
      result.labels[farthest] = c;
      counts[c] = 1;
      --counts[donor];
      // Recompute the donor mean without the departed point.
      auto drow = next.row(donor);
      std::fill(drow.begin(), drow.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (result.labels[i] != donor) continue;
        const auto q = input->row(i);
        for (std::size_t d = 0; d < dim; ++d) drow[d] += q[d];
      }
      if (counts[donor] > 0) {
        for (std::size_t d = 0; d < dim; ++d) drow[d] /= static_cast<double>(counts[donor]);
      }
    }

    double shift = 0.0;
    for (int c = 0; c < k; ++c) {
      shift = std::max(shift, euclidean_distance(centroids.row(c), next.row(c)));
    }
    centroids = std::move(next);
    if (shift < config.tol) break;
  }

  // Final labels and inertia against the final centroids.
  double final_inertia = 0.0;
  assign_pass(&final_inertia);
  result.inertia_history.push_back(final_inertia);
  result.inertia = final_inertia;
  result.centroids = std::move(centroids);
  return result;
}

std::vector<int> rank_centroids(std::span<const double> point, const Matrix& centroids) {
  if (centroids.rows == 0) throw DomainError("rank_centroids: no centroids");
  std::vector<int> order(centroids.rows);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> dist(centroids.rows);
  for (std::size_t c = 0; c < centroids.rows; ++c) {
    dist[c] = squared_distance(point, centroids.row(c));
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dist[a] < dist[b]; });
  return order;
}

int second_closest_centroid(std::span<const double> point, const Matrix& centroids) {
  if (centroids.rows < 2) {
    throw DomainError("second-closest centroid undefined with fewer than 2 centroids");
  }
  return rank_centroids(point, centroids)[1];
}

double silhouette_score(const EmbeddingMatrix& points, std::span<const int> labels,
                        DistanceMetric metric) {
  const std::size_t n = points.size();
  if (labels.size() != n) throw DomainError("silhouette: labels/points size mismatch");
  if (n == 0) throw DomainError("silhouette: empty input");

  std::vector<int> distinct(labels.begin(), labels.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) throw DomainError("silhouette requires at least 2 clusters");

  std::unordered_map<int, std::size_t> cluster_of;
  for (std::size_t c = 0; c < distinct.size(); ++c) cluster_of[distinct[c]] = c;
  std::vector<std::size_t> sizes(distinct.size(), 0);
  for (int l : labels) ++sizes[cluster_of[l]];

  auto distance = [&](std::size_t i, std::size_t j) {
    return metric == DistanceMetric::Euclidean
               ? euclidean_distance(points.row(i), points.row(j))
               : cosine_distance(points.row(i), points.row(j));
  };

  // O(n^2); fine at the corpus sizes this toolkit targets.
  Matrix dist(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(i, j);
      dist.at(i, j) = d;
      dist.at(j, i) = d;
    }
  }

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t own = cluster_of[labels[i]];
    if (sizes[own] <= 1) continue;  // singleton contributes s = 0

    std::vector<double> sum_to(distinct.size(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sum_to[cluster_of[labels[j]]] += dist.at(i, j);
    }
    const double a = sum_to[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < distinct.size(); ++c) {
      if (c == own || sizes[c] == 0) continue;
      b = std::min(b, sum_to[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(n);
}

KSelection select_k(const EmbeddingMatrix& points, int k_min, int k_max,
                    const ClusteringConfig& base_config) {
  const std::size_t n = points.size();
  if (k_min > k_max) throw ConfigError("select_k: empty k range");
  if (k_min < 2 || static_cast<std::size_t>(k_max) > (n == 0 ? 0 : n - 1)) {
    throw ConfigError("select_k: range must lie within [2, n-1]");
  }

  KSelection selection;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = k_min; k <= k_max; ++k) {
    ClusteringConfig config = base_config;
    config.k = k;
    const ClusterAssignment assignment = kmeans(points, config);
    KSelection::Entry entry;
    entry.k = k;
    std::vector<int> present(assignment.labels.begin(), assignment.labels.end());
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());
    if (present.size() >= 2) {
      entry.silhouette = silhouette_score(
          points, assignment.labels,
          config.normalize ? DistanceMetric::Cosine : DistanceMetric::Euclidean);
    }
    if (entry.silhouette && *entry.silhouette > best) {  // ties keep the smaller k
      best = *entry.silhouette;
      selection.k = k;
    }
    selection.table.push_back(entry);
  }
  if (selection.k == 0) {
    throw DomainError("select_k: no k in the range produced at least 2 clusters");
  }
  return selection;
}

json assignment_to_json(const ClusterAssignment& assignment) {
  json j;
  j["k"] = assignment.k();
  j["ids"] = assignment.ids;
  j["labels"] = assignment.labels;
  j["inertia"] = assignment.inertia;
  j["inertia_history"] = assignment.inertia_history;
  json centroids = json::array();
  for (std::size_t c = 0; c < assignment.centroids.rows; ++c) {
    const auto row = assignment.centroids.row(c);
    centroids.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["centroids"] = std::move(centroids);
  return j;
}

ClusterAssignment assignment_from_json(const json& j) {
  ClusterAssignment a;
  a.ids = j.at("ids").get<std::vector<std::string>>();
  a.labels = j.at("labels").get<std::vector<int>>();
  a.inertia = j.at("inertia").get<double>();
  if (j.contains("inertia_history")) {
    a.inertia_history = j.at("inertia_history").get<std::vector<double>>();
  }
  const auto& centroids = j.at("centroids");
  a.centroids.rows = centroids.size();
  for (const auto& row : centroids) {
    if (a.centroids.cols == 0) a.centroids.cols = row.size();
    if (row.size() != a.centroids.cols) throw FormatError("assignment: ragged centroids");
    for (const auto& v : row) a.centroids.data.push_back(v.get<double>());
  }
  if (a.ids.size() != a.labels.size()) throw FormatError("assignment: ids/labels size mismatch");
  return a;
}

void save_assignment(const ClusterAssignment& assignment, const std::string& path) {
  write_file(path, assignment_to_json(assignment).dump(2) + "\n");
}

ClusterAssignment load_assignment(const std::string& path) {
  try {
    return assignment_from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    throw ParseError("assignment file " + path + ": " + e.what(), e.byte);
  } catch (const json::exception& e) {
    throw FormatError("assignment file " + path + ": " + e.what());
  }
}

}  // namespace themekit
