#include "themekit/preferences.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "themekit/errors.hpp"
#include "themekit/rng.hpp"

namespace themekit {

namespace {

// ceil(fraction * n) with a guard against  cases like 0.1 * 200 landing a hair
// above the integer it represents.
std::size_t fraction_ceil(double fraction, std::size_t n) {
  const double raw = fraction * static_cast<double>(n);
  return static_cast<std::size_t>(std::max(0.0, std::ceil(raw - 1e-9)));
}

struct AlignedViews {
  // probe/embedding row index per gold id position
  std::vector<std::size_t> emb_row;
  std::vector<int> probe_label;
};

AlignedViews align(const GoldAssignment& gold, const ClusterAssignment& probe,
                   const EmbeddingMatrix& embeddings) {
  if (gold.size() != probe.ids.size() || gold.size() != embeddings.size()) {
    throw ResolutionError("gold, probe and embeddings must cover the same uid set");
  }
  const auto emb_index = build_id_index(embeddings);
  const auto probe_map = probe.label_map();
  AlignedViews views;
  views.emb_row.reserve(gold.size());
  views.probe_label.reserve(gold.size());
  for (const std::string& id : gold.ids) {
    const auto eit = emb_index.find(id);
    const auto pit = probe_map.find(id);
    if (eit == emb_index.end() || pit == probe_map.end()) {
      throw ResolutionError("uid " + id + " missing from probe clustering or embeddings");
    }
    views.emb_row.push_back(eit->second);
    views.probe_label.push_back(pit->second);
  }
  return views;
}

std::vector<CandidateWeight> normalize_weights(std::vector<CandidateWeight> candidates) {
  double total = 0.0;
  for (const CandidateWeight& c : candidates) total += c.weight;
  if (total > 0.0) {
    for (CandidateWeight& c : candidates) c.weight /= total;
  } else if (!candidates.empty()) {
    // Degenerate geometry (all weights clamped/zero): fall back to uniform so
    // the sampler can still make progress.
    const double u = 1.0 / static_cast<double>(candidates.size());
    for (CandidateWeight& c : candidates) c.weight = u;
  }
  return candidates;
}

std::vector<CandidateWeight> build_candidates(const GoldAssignment& gold,
                                              const ClusterAssignment& probe,
                                              const EmbeddingMatrix& embeddings, bool should_link,
                                              double weight_floor) {
  const AlignedViews views = align(gold, probe, embeddings);
  std::vector<CandidateWeight> candidates;
  const std::size_t n = gold.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool same_gold = gold.labels[i] == gold.labels[j];
      const bool same_probe = views.probe_label[i] == views.probe_label[j];
      const bool wanted = should_link ? (same_gold && !same_probe) : (!same_gold && same_probe);
      if (!wanted) continue;
      const double dist =
          cosine_distance(embeddings.row(views.emb_row[i]), embeddings.row(views.emb_row[j]));
      CandidateWeight c;
      c.pair.a = Uid::from_key(gold.ids[i]);
      c.pair.b = Uid::from_key(gold.ids[j]);
      c.pair.same_theme = should_link;
      c.weight = should_link ? dist : std::max(weight_floor, 1.0 - dist);
      candidates.push_back(std::move(c));
    }
  }
  return normalize_weights(std::move(candidates));
}

struct SampleOneList {
  std::vector<PreferencePair> emitted;
  std::vector<CoverageStat> coverage;
  bool shortfall = false;
};

SampleOneList sample_list(const std::vector<CandidateWeight>& candidates, std::size_t target,
                          const GoldAssignment& gold, double max_coverage, Rng& rng) {
  const auto gold_map = gold.label_map();
  std::map<int, std::size_t> cluster_sizes;
  for (int l : gold.labels) ++cluster_sizes[l];
  std::map<int, std::set<std::string>> used;  // gold cluster -> distinct uids in emitted pairs
  auto cap_of = [&](int cluster) {
    return fraction_ceil(max_coverage, cluster_sizes.at(cluster));
  };

  std::vector<double> weights;
  weights.reserve(candidates.size());
  std::size_t available = 0;
  for (const CandidateWeight& c : candidates) {
    weights.push_back(c.weight);
    if (c.weight > 0.0) ++available;
  }

  SampleOneList out;
  while (out.emitted.size() < target && available > 0) {
    const std::size_t pick = weighted_index(rng, weights);
    weights[pick] = 0.0;  // without replacement
    --available;

    const PreferencePair& pair = candidates[pick].pair;
    const std::string ka = pair.a.key();
    const std::string kb = pair.b.key();
    const int ca = gold_map.at(ka);
    const int cb = gold_map.at(kb);

    bool fits;
    if (ca == cb) {
      auto& set = used[ca];
      const std::size_t grow = (set.count(ka) ? 0 : 1) + (set.count(kb) ? 0 : 1);
      fits = set.size() + grow <= cap_of(ca);
    } else {
      fits = used[ca].size() + (used[ca].count(ka) ? 0 : 1) <= cap_of(ca) &&
             used[cb].size() + (used[cb].count(kb) ? 0 : 1) <= cap_of(cb);
    }
    if (!fits) continue;  // greedy rejection, draw again from what is left

    used[ca].insert(ka);
    used[cb].insert(kb);
    out.emitted.push_back(pair);
  }
  out.shortfall = out.emitted.size() < target;

  for (const auto& [cluster, size] : cluster_sizes) {
    CoverageStat stat;
    stat.gold_cluster = cluster;
    stat.cluster_size = size;
    stat.cap = cap_of(cluster);
    const auto it = used.find(cluster);
    stat.distinct_utterances = it == used.end() ? 0 : it->second.size();
    out.coverage.push_back(stat);
  }
  return out;
}

}  // namespace

std::unordered_map<std::string, int> GoldAssignment::label_map() const {
  std::unordered_map<std::string, int> map;
  map.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) map.emplace(ids[i], labels[i]);
  return map;
}

GoldAssignment gold_from_corpus(const ThemedIndex& index) {
  GoldAssignment gold;
  std::map<std::pair<std::string, std::string>, int> theme_ids;
  for (const ThemedUtterance& u : index.items()) {
    if (!u.has_gold()) {
      throw DomainError("utterance " + u.uid.key() +
                        " carries no gold label; gold assignment unavailable");
    }
    const std::pair<std::string, std::string> key{*u.gold_specific,
                                                  u.gold_vague.value_or("")};
    auto it = theme_ids.find(key);
    if (it == theme_ids.end()) {
      it = theme_ids.emplace(key, static_cast<int>(gold.theme_names.size())).first;
      gold.theme_names.push_back({*u.gold_specific, u.gold_vague});
    }
    gold.ids.push_back(u.uid.key());
    gold.labels.push_back(it->second);
  }
  return gold;
}

std::vector<CandidateWeight> build_should_link_candidates(const GoldAssignment& gold,
                                                          const ClusterAssignment& probe,
                                                          const EmbeddingMatrix& embeddings) {
  return build_candidates(gold, probe, embeddings, /*should_link=*/true, 0.0);
}

std::vector<CandidateWeight> build_cannot_link_candidates(const GoldAssignment& gold,
                                                          const ClusterAssignment& probe,
                                                          const EmbeddingMatrix& embeddings,
                                                          double weight_floor) {
  return build_candidates(gold, probe, embeddings, /*should_link=*/false, weight_floor);
}

PairSample generate_pairs(const GoldAssignment& gold, const ClusterAssignment& probe,
                          const EmbeddingMatrix& embeddings, const SamplerConfig& config) {
  if (config.target_fraction <= 0.0 || config.target_fraction > 1.0 ||
      config.max_cluster_coverage <= 0.0 || config.max_cluster_coverage > 1.0) {
    throw ConfigError("sampler fractions must lie in (0, 1]");
  }

  PairSample sample;
  sample.target = fraction_ceil(config.target_fraction, gold.size());
  sample.should_weights = build_should_link_candidates(gold, probe, embeddings);
  sample.cannot_weights =
      build_cannot_link_candidates(gold, probe, embeddings, config.cannot_link_weight_floor);

  Rng rng(config.seed);
  Rng should_rng = rng.split("should-link");
  Rng cannot_rng = rng.split("cannot-link");

  auto run = [&](const std::vector<CandidateWeight>& candidates, Rng& list_rng,
                 const char* list_name, std::vector<PreferencePair>* emitted,
                 std::vector<CoverageStat>* coverage) {
    if (candidates.empty()) {
      sample.warnings.push_back(std::string(list_name) + ": empty candidate set, no pairs emitted");
      return;
    }
    SampleOneList result =
        sample_list(candidates, sample.target, gold, config.max_cluster_coverage, list_rng);
    if (result.shortfall) {
      sample.warnings.push_back(std::string(list_name) + ": emitted " +
                                std::to_string(result.emitted.size()) + " of the targeted " +
                                std::to_string(sample.target) + " pairs");
    }
    *emitted = std::move(result.emitted);
    *coverage = std::move(result.coverage);
  };

  run(sample.should_weights, should_rng, "should-link", &sample.should_link,
      &sample.should_coverage);
  run(sample.cannot_weights, cannot_rng, "cannot-link", &sample.cannot_link,
      &sample.cannot_coverage);
  return sample;
}

AdjustmentOutcome adjust_assignment(const ClusterAssignment& pred,
                                    const EmbeddingMatrix& embeddings,
                                    const std::vector<PreferencePair>& should_link,
                                    const std::vector<PreferencePair>& cannot_link) {
  AdjustmentOutcome outcome;
  outcome.assignment = pred;

  std::unordered_map<std::string, std::size_t> position;
  position.reserve(pred.ids.size());
  for (std::size_t i = 0; i < pred.ids.size(); ++i) position.emplace(pred.ids[i], i);
  const auto emb_index = build_id_index(embeddings);

  auto index_of = [&](const Uid& uid) {
    const auto it = position.find(uid.key());
    if (it == position.end()) {
      throw ResolutionError("uid " + uid.key() + " not present in the assignment");
    }
    return it->second;
  };

  std::vector<int>& labels = outcome.assignment.labels;

  for (const PreferencePair& pair : should_link) {
    const std::size_t ia = index_of(pair.a);
    const std::size_t ib = index_of(pair.b);
    PairApplication app;
    app.pair = pair;
    if (labels[ia] != labels[ib]) {
      app.moved = true;
      app.from = labels[ib];
      app.to = labels[ia];
      labels[ib] = labels[ia];
    }
    app.satisfied_after = labels[ia] == labels[ib];
    outcome.log.push_back(app);
  }

  for (const PreferencePair& pair : cannot_link) {
    const std::size_t ia = index_of(pair.a);
    const std::size_t ib = index_of(pair.b);
    PairApplication app;
    app.pair = pair;
    if (labels[ia] == labels[ib]) {
      const auto eit = emb_index.find(pair.b.key());
      if (eit == emb_index.end()) {
        throw ResolutionError("uid " + pair.b.key() + " missing from embeddings");
      }
      const int target = second_closest_centroid(embeddings.row(eit->second),
                                                 outcome.assignment.centroids);
      app.moved = true;
      app.from = labels[ib];
      app.to = target;
      labels[ib] = target;
    }
    app.satisfied_after = labels[ia] != labels[ib];
    outcome.log.push_back(app);
  }

  // Centroids are intentionally left as-is: the pass is a label re-assignment,
  // not a re-clustering. Inertia is stale after moves, so recompute it against
  // the frozen centroids for consistency of the persisted artifact.
  double inertia = 0.0;
  for (std::size_t i = 0; i < outcome.assignment.ids.size(); ++i) {
    const auto eit = emb_index.find(outcome.assignment.ids[i]);
    if (eit == emb_index.end()) continue;
    inertia += squared_distance(embeddings.row(eit->second),
                                outcome.assignment.centroids.row(labels[i]));
  }
  outcome.assignment.inertia = inertia;
  return outcome;
}

SatisfactionReport satisfaction_report(const ClusterAssignment& assignment,
                                       const std::vector<PreferencePair>& should_link,
                                       const std::vector<PreferencePair>& cannot_link) {
  const auto labels = assignment.label_map();
  auto label_of = [&](const Uid& uid) {
    const auto it = labels.find(uid.key());
    if (it == labels.end()) {
      throw ResolutionError("uid " + uid.key() + " not present in the assignment");
    }
    return it->second;
  };

  SatisfactionReport report;
  report.should_total = should_link.size();
  report.cannot_total = cannot_link.size();
  for (const PreferencePair& pair : should_link) {
    const bool ok = label_of(pair.a) == label_of(pair.b);
    report.should_satisfied += ok ? 1 : 0;
    report.verdicts.push_back({pair, ok});
  }
  for (const PreferencePair& pair : cannot_link) {
    const bool ok = label_of(pair.a) != label_of(pair.b);
    report.cannot_satisfied += ok ? 1 : 0;
    report.verdicts.push_back({pair, ok});
  }
  if (report.should_total > 0) {
    report.should_fraction =
        static_cast<double>(report.should_satisfied) / static_cast<double>(report.should_total);
  }
  if (report.cannot_total > 0) {
    report.cannot_fraction =
        static_cast<double>(report.cannot_satisfied) / static_cast<double>(report.cannot_total);
  }
  return report;
}

}  // namespace themekit
