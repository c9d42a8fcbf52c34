#include "themekit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "themekit/errors.hpp"

namespace themekit {

namespace {

// Remaps arbitrary label values to dense 0..k-1 in order of first appearance.
std::vector<int> densify(std::span<const int> labels, std::size_t* k_out) {
  std::unordered_map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    const auto [it, inserted] = remap.emplace(l, static_cast<int>(remap.size()));
    (void)inserted;
    out.push_back(it->second);
  }
  *k_out = remap.size();
  return out;
}

double entropy(const std::vector<std::int64_t>& counts, double n) {
  double h = 0.0;
  for (std::int64_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

// Classic potentials formulation of the assignment problem; minimizes over a
// square matrix, tolerates negative entries, deterministic scan order.
std::pair<std::vector<int>, double> hungarian_min(const Matrix& a) {
  const int n = static_cast<int>(a.rows);
  if (n == 0) return {{}, 0.0};
  const double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a.at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  }
  double cost = 0.0;
  for (int r = 0; r < n; ++r) cost += a.at(r, row_to_col[r]);
  return {std::move(row_to_col), cost};
}

// Minimum assignment value over the submatrix keeping rows_from.. and the
// still-free columns; used by the lexicographic refinement below.
double sub_objective(const Matrix& a, int rows_from, const std::vector<char>& col_used) {
  const int n = static_cast<int>(a.rows);
  std::vector<int> cols;
  for (int c = 0; c < n; ++c) {
    if (!col_used[c]) cols.push_back(c);
  }
  const int m = n - rows_from;
  if (m == 0) return 0.0;
  Matrix sub(m, m);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) sub.at(r, c) = a.at(rows_from + r, cols[c]);
  }
  return hungarian_min(sub).second;
}

}  // namespace

ConfusionMatrix confusion_matrix(std::span<const int> gold, std::span<const int> pred) {
  if (gold.size() != pred.size()) throw DomainError("confusion_matrix: size mismatch");
  if (gold.empty()) throw DomainError("confusion_matrix: empty input");
  std::size_t r = 0, p = 0;
  const std::vector<int> g = densify(gold, &r);
  const std::vector<int> q = densify(pred, &p);
  ConfusionMatrix cm;
  cm.counts.assign(r, std::vector<std::int64_t>(p, 0));
  for (std::size_t i = 0; i < g.size(); ++i) ++cm.counts[g[i]][q[i]];
  cm.total = static_cast<std::int64_t>(g.size());
  return cm;
}

double nmi(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw DomainError("nmi: size mismatch");
  if (a.empty()) throw DomainError("nmi: empty input");
  const ConfusionMatrix cm = confusion_matrix(a, b);
  const std::size_t r = cm.counts.size();
  const std::size_t p = cm.counts[0].size();
  const double n = static_cast<double>(cm.total);

  std::vector<std::int64_t> row_sums(r, 0), col_sums(p, 0);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      row_sums[i] += cm.counts[i][j];
      col_sums[j] += cm.counts[i][j];
    }
  }
  const double hu = entropy(row_sums, n);
  const double hv = entropy(col_sums, n);
  if (hu == 0.0 && hv == 0.0) return 1.0;  // both sides a single cluster
  if (hu == 0.0 || hv == 0.0) return 0.0;

  double mi = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const std::int64_t c = cm.counts[i][j];
      if (c == 0) continue;
      const double pij = static_cast<double>(c) / n;
      mi += pij * std::log(pij * n * n / (static_cast<double>(row_sums[i]) *
                                          static_cast<double>(col_sums[j])));
    }
  }
  return std::clamp(mi / ((hu + hv) / 2.0), 0.0, 1.0);
}

double acc(std::span<const int> gold, std::span<const int> pred) {
  const ConfusionMatrix cm = confusion_matrix(gold, pred);
  const std::size_t r = cm.counts.size();
  const std::size_t p = cm.counts[0].size();
  const std::size_t s = std::max(r, p);

  // Pad square and maximize matched counts = minimize the negated matrix.
  Matrix costs(s, s, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      costs.at(i, j) = -static_cast<double>(cm.counts[i][j]);
    }
  }
  const double matched = -hungarian_min(costs).second;
  return matched / static_cast<double>(cm.total);
}

AssignmentResult hungarian(const Matrix& costs, AssignSense sense) {
  if (costs.rows != costs.cols) throw DomainError("hungarian: matrix must be square");
  for (double v : costs.data) {
    if (!std::isfinite(v)) throw DomainError("hungarian: matrix must be finite");
  }
  const int n = static_cast<int>(costs.rows);
  if (n == 0) return {{}, 0.0};

  Matrix a = costs;
  if (sense == AssignSense::Maximize) {
    for (double& v : a.data) v = -v;
  }
  const double best = hungarian_min(a).second;

  double scale = 1.0;
  for (double v : a.data) scale = std::max(scale, std::abs(v));
  const double eps = 1e-9 * scale;

  // Lexicographically smallest optimum: fix each row to the smallest column
  // that still admits an assignment of optimal value.
  std::vector<int> row_to_col(n, -1);
  std::vector<char> col_used(n, 0);
  double prefix = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < n; ++c) {
      if (col_used[c]) continue;
      col_used[c] = 1;
      const double rest = sub_objective(a, i + 1, col_used);
      if (prefix + a.at(i, c) + rest <= best + eps) {
        row_to_col[i] = c;
        prefix += a.at(i, c);
        break;
      }
      col_used[c] = 0;
    }
  }

  AssignmentResult result;
  result.row_to_col = std::move(row_to_col);
  result.objective = sense == AssignSense::Maximize ? -best : best;
  return result;
}

std::vector<std::string> rouge_tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

namespace {

PrfScore overlap_f1(const std::vector<std::string>& ref_grams,
                    const std::vector<std::string>& cand_grams) {
  PrfScore s;
  if (ref_grams.empty() || cand_grams.empty()) return s;
  std::map<std::string, std::int64_t> ref_counts;
  for (const auto& g : ref_grams) ++ref_counts[g];
  std::int64_t matches = 0;
  for (const auto& g : cand_grams) {
    const auto it = ref_counts.find(g);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++matches;
    }
  }
  s.precision = static_cast<double>(matches) / static_cast<double>(cand_grams.size());
  s.recall = static_cast<double>(matches) / static_cast<double>(ref_grams.size());
  s.f1 = (s.precision + s.recall) > 0.0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

std::vector<std::string> bigrams(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    out.push_back(tokens[i] + "\x1f" + tokens[i + 1]);
  }
  return out;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

RougeScores rouge(const std::string& reference, const std::string& candidate) {
  RougeScores scores;
  const std::vector<std::string> ref = rouge_tokenize(reference);
  const std::vector<std::string> cand = rouge_tokenize(candidate);
  if (ref.empty() || cand.empty()) {
    scores.empty_input = true;
    return scores;
  }
  scores.rouge1 = overlap_f1(ref, cand);
  scores.rouge2 = overlap_f1(bigrams(ref), bigrams(cand));

  const double lcs = static_cast<double>(lcs_length(ref, cand));
  scores.rougeL.precision = lcs / static_cast<double>(cand.size());
  scores.rougeL.recall = lcs / static_cast<double>(ref.size());
  scores.rougeL.f1 = (scores.rougeL.precision + scores.rougeL.recall) > 0.0
                         ? 2.0 * scores.rougeL.precision * scores.rougeL.recall /
                               (scores.rougeL.precision + scores.rougeL.recall)
                         : 0.0;
  return scores;
}

BertScore bertscore(const TokenEmbeddingSequence& reference,
                    const TokenEmbeddingSequence& candidate) {
  if (reference.tokens.empty() || candidate.tokens.empty()) {
    throw DomainError("bertscore: empty token sequence");
  }
  const std::size_t nr = reference.tokens.size();
  const std::size_t nc = candidate.tokens.size();
  Matrix sim(nr, nc);
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < nc; ++j) {
      sim.at(i, j) = cosine_similarity(reference.vectors.row(i), candidate.vectors.row(j));
    }
  }
  BertScore score;
  for (std::size_t j = 0; j < nc; ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nr; ++i) best = std::max(best, sim.at(i, j));
    score.precision += best;
  }
  score.precision /= static_cast<double>(nc);
  for (std::size_t i = 0; i < nr; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nc; ++j) best = std::max(best, sim.at(i, j));
    score.recall += best;
  }
  score.recall /= static_cast<double>(nr);
  score.f1 = (score.precision + score.recall) != 0.0
                 ? 2.0 * score.precision * score.recall / (score.precision + score.recall)
                 : 0.0;
  return score;
}

LabelScore label_similarity(const GoldAssignment& gold,
                            const std::unordered_map<std::string, std::string>& predictions,
                            EmbeddingProvider* provider, const LabelMetricToggles& toggles) {
  LabelScore out;
  const bool want_cosine = toggles.cosine && provider != nullptr;
  bool want_bert = toggles.bertscore && provider != nullptr;
  if (toggles.cosine && provider == nullptr) {
    out.warnings.push_back("cosine metric skipped: no embedding provider configured");
  }
  if (toggles.bertscore && provider == nullptr) {
    out.warnings.push_back("bertscore skipped: no embedding provider configured");
  }

  // Embed every distinct label text once.
  std::vector<std::string> texts;
  std::unordered_map<std::string, std::size_t> text_index;
  auto intern = [&](const std::string& t) {
    if (text_index.emplace(t, texts.size()).second) texts.push_back(t);
  };
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const GoldAssignment::ThemeName& theme = gold.theme_names[gold.labels[i]];
    intern(theme.specific);
    if (theme.vague) intern(*theme.vague);
    const auto pit = predictions.find(gold.ids[i]);
    if (pit != predictions.end() && !pit->second.empty()) intern(pit->second);
  }

  Matrix sentence_vectors;
  if (want_cosine && !texts.empty()) sentence_vectors = provider->embed(texts);

  std::unordered_map<std::string, TokenEmbeddingSequence> token_cache;
  auto tokens_for = [&](const std::string& text) -> const TokenEmbeddingSequence& {
    auto it = token_cache.find(text);
    if (it == token_cache.end()) {
      it = token_cache.emplace(text, provider->embed_tokens(text)).first;
    }
    return it->second;
  };

  double sum_cos = 0, sum_r1 = 0, sum_r2 = 0, sum_rl = 0, sum_bp = 0, sum_br = 0, sum_bf = 0;
  std::size_t n_scored = 0;

  for (std::size_t i = 0; i < gold.size(); ++i) {
    const std::string& uid = gold.ids[i];
    const GoldAssignment::ThemeName& theme = gold.theme_names[gold.labels[i]];
    std::vector<std::string> references{theme.specific};
    if (theme.vague) references.push_back(*theme.vague);

    LabelComponents comp;
    const auto pit = predictions.find(uid);
    const bool missing = pit == predictions.end() || pit->second.empty();
    if (missing) {
      out.missing_predictions.push_back(uid);
      // Missing predictions score 0 so partial submissions stay evaluable.
      comp.rouge1 = comp.rouge2 = comp.rougeL = 0.0;
      if (want_cosine) comp.cosine = 0.0;
      if (want_bert) comp.bert_p = comp.bert_r = comp.bert_f1 = 0.0;
    } else {
      const std::string& predicted = pit->second;
      if (toggles.rouge) {
        double r1 = 0, r2 = 0, rl = 0;
        for (const std::string& ref : references) {
          const RougeScores rs = rouge(ref, predicted);
          r1 = std::max(r1, rs.rouge1.f1);
          r2 = std::max(r2, rs.rouge2.f1);
          rl = std::max(rl, rs.rougeL.f1);
        }
        comp.rouge1 = r1;
        comp.rouge2 = r2;
        comp.rougeL = rl;
      }
      if (want_cosine) {
        double best = -1.0;
        const auto pred_row = sentence_vectors.row(text_index.at(predicted));
        for (const std::string& ref : references) {
          best = std::max(best,
                          cosine_similarity(sentence_vectors.row(text_index.at(ref)), pred_row));
        }
        comp.cosine = best;
      }
      if (want_bert) {
        try {
          double bp = -2, br = -2, bf = -2;
          for (const std::string& ref : references) {
            const BertScore bs = bertscore(tokens_for(ref), tokens_for(predicted));
            if (bs.f1 > bf) {
              bp = bs.precision;
              br = bs.recall;
              bf = bs.f1;
            }
          }
          comp.bert_p = bp;
          comp.bert_r = br;
          comp.bert_f1 = bf;
        } catch (const TokenModeUnsupported&) {
          want_bert = false;
          out.warnings.push_back("bertscore skipped: provider has no token mode");
        }
      }
    }

    ++n_scored;
    sum_cos += comp.cosine.value_or(0.0);
    sum_r1 += comp.rouge1.value_or(0.0);
    sum_r2 += comp.rouge2.value_or(0.0);
    sum_rl += comp.rougeL.value_or(0.0);
    sum_bp += comp.bert_p.value_or(0.0);
    sum_br += comp.bert_r.value_or(0.0);
    sum_bf += comp.bert_f1.value_or(0.0);
    out.per_utterance.emplace_back(uid, std::move(comp));
  }

  if (n_scored > 0) {
    const double n = static_cast<double>(n_scored);
    if (toggles.rouge) {
      out.aggregates.rouge1 = sum_r1 / n;
      out.aggregates.rouge2 = sum_r2 / n;
      out.aggregates.rougeL = sum_rl / n;
    }
    if (want_cosine) out.aggregates.cosine = sum_cos / n;
    if (want_bert) {
      out.aggregates.bert_p = sum_bp / n;
      out.aggregates.bert_r = sum_br / n;
      out.aggregates.bert_f1 = sum_bf / n;
    }
  }
  return out;
}

}  // namespace themekit
