#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "themekit/clustering.hpp"
#include "themekit/corpus.hpp"
#include "themekit/embeddings.hpp"

namespace themekit {

// The reference mapping of themed utterances to theme clusters, with the dual
// (specific, vague) reference labels per theme.
struct GoldAssignment {
  struct ThemeName {
    std::string specific;
    std::optional<std::string> vague;
    bool operator==(const ThemeName&) const = default;
  };

  std::vector<std::string> ids;   // themed uids, document order
  std::vector<int> labels;        // dense theme ids, parallel to ids
  std::vector<ThemeName> theme_names;  // indexed by theme id

  std::size_t size() const { return ids.size(); }
  std::unordered_map<std::string, int> label_map() const;
};

// Groups the themed working set by its gold labels. Themes are identified by
// the (specific, vague) label pair, ids assigned in order of first
// appearance. DomainError when any utterance lacks a gold label.
GoldAssignment gold_from_corpus(const ThemedIndex& index);

struct SamplerConfig {
  double target_fraction = 0.10;      // pairs per list, as a fraction of themed utterances
  double max_cluster_coverage = 0.30; // distinct utterances per gold cluster, per list
  std::uint64_t seed = 0;
  double cannot_link_weight_floor = 0.0;  // clamp for negative similarities
};

struct CandidateWeight {
  PreferencePair pair;
  double weight = 0.0;  // normalized over the candidate set
};

struct CoverageStat {
  int gold_cluster = 0;
  std::size_t cluster_size = 0;
  std::size_t distinct_utterances = 0;  // appearing in this list's emitted pairs
  std::size_t cap = 0;
};

struct PairSample {
  std::vector<PreferencePair> should_link;
  std::vector<PreferencePair> cannot_link;

  // Pre-sampling normalized weight tables, for auditing the distributions.
  std::vector<CandidateWeight> should_weights;
  std::vector<CandidateWeight> cannot_weights;

  std::size_t target = 0;
  std::vector<CoverageStat> should_coverage;
  std::vector<CoverageStat> cannot_coverage;
  std::vector<std::string> warnings;  // shortfalls, empty candidate sets
};

// Builds both candidate sets from the gold/probe disagreement and samples
// each list without replacement:
//   should-link: same gold theme, different probe cluster; weights are the
//     normalized cosine distances (far pairs are the interesting ones).
//   cannot-link: different gold themes, same probe cluster; weights are the
//     normalized similarities 1 - dist, clamped at the configured floor.
// Each list targets ceil(target_fraction * n) pairs and rejects draws that
// would push a gold cluster past ceil(max_cluster_coverage * |cluster|)
// distinct utterances for that list. Deterministic given the seed.
PairSample generate_pairs(const GoldAssignment& gold, const ClusterAssignment& probe,
                          const EmbeddingMatrix& embeddings, const SamplerConfig& config);

// Candidate construction alone, exposed for audits and statistics.
std::vector<CandidateWeight> build_should_link_candidates(const GoldAssignment& gold,
                                                          const ClusterAssignment& probe,
                                                          const EmbeddingMatrix& embeddings);
std::vector<CandidateWeight> build_cannot_link_candidates(const GoldAssignment& gold,
                                                          const ClusterAssignment& probe,
                                                          const EmbeddingMatrix& embeddings,
                                                          double weight_floor = 0.0);

struct PairApplication {
  PreferencePair pair;
  bool moved = false;
  int from = -1;
  int to = -1;
  bool satisfied_after = false;  // immediately after processing this pair
};

struct AdjustmentOutcome {
  ClusterAssignment assignment;
  std::vector<PairApplication> log;
};

// Single-pass re-assignment: every should-link pair in order (b joins a's
// cluster when they differ), then every cannot-link pair in order (b moves to
// the cluster with the second-closest centroid when they collide). Centroids
// are frozen throughout; labels of utterances not named in any pair are
// untouched. Later moves can undo earlier pairs when pairs overlap; residual
// violations are surfaced by satisfaction_report, never silently dropped.
AdjustmentOutcome adjust_assignment(const ClusterAssignment& pred,
                                    const EmbeddingMatrix& embeddings,
                                    const std::vector<PreferencePair>& should_link,
                                    const std::vector<PreferencePair>& cannot_link);

struct SatisfactionReport {
  std::size_t should_total = 0;
  std::size_t should_satisfied = 0;
  std::size_t cannot_total = 0;
  std::size_t cannot_satisfied = 0;
  double should_fraction = 1.0;  // vacuously 1.0 when a list is empty
  double cannot_fraction = 1.0;

  struct Verdict {
    PreferencePair pair;
    bool satisfied = false;
  };
  std::vector<Verdict> verdicts;  // should-link first, then cannot-link
};

SatisfactionReport satisfaction_report(const ClusterAssignment& assignment,
                                       const std::vector<PreferencePair>& should_link,
                                       const std::vector<PreferencePair>& cannot_link);

}  // namespace themekit
