#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "themekit/embeddings.hpp"
#include "themekit/labeling.hpp"
#include "themekit/matrix.hpp"
#include "themekit/preferences.hpp"

namespace themekit {

// ---------------------------------------------------------------------------
// Clustering agreement

struct ConfusionMatrix {
  std::vector<std::vector<std::int64_t>> counts;  // gold themes x predicted clusters
  std::int64_t total = 0;
};

ConfusionMatrix confusion_matrix(std::span<const int> gold, std::span<const int> pred);

// Mutual information normalized by the arithmetic mean of the two entropies,
// natural log inside, result in [0, 1]. Two degenerate conventions keep runs
// comparable: both sides single-cluster -> 1.0, exactly one side -> 0.0.
double nmi(std::span<const int> a, std::span<const int> b);

// Accuracy under the optimal one-to-one cluster alignment: the confusion
// matrix is padded square with zeros and matched by the Hungarian algorithm.
double acc(std::span<const int> gold, std::span<const int> pred);

enum class AssignSense { Minimize, Maximize };

struct AssignmentResult {
  std::vector<int> row_to_col;
  double objective = 0.0;
};

// Optimal assignment over a square finite cost matrix, O(n^3) core. Among
// equal-objective optima the lexicographically smallest row->col assignment
// is returned, which costs extra solves but keeps runs reproducible.
AssignmentResult hungarian(const Matrix& costs, AssignSense sense = AssignSense::Minimize);

// ---------------------------------------------------------------------------
// Label similarity

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct RougeScores {
  PrfScore rouge1;
  PrfScore rouge2;
  PrfScore rougeL;  // sentence-level LCS
  bool empty_input = false;  // a side tokenized to nothing; scores are 0
};

// Normative tokenization for ROUGE in this toolkit: lowercase, split on
// non-alphanumeric runs.
std::vector<std::string> rouge_tokenize(const std::string& text);
RougeScores rouge(const std::string& reference, const std::string& candidate);

struct BertScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Greedy token matching over contextual token embeddings: precision averages
// each candidate token's best cosine match in the reference, recall the
// reverse, F1 the harmonic mean. No IDF weighting, no baseline rescaling.
BertScore bertscore(const TokenEmbeddingSequence& reference, const TokenEmbeddingSequence& candidate);

struct LabelComponents {
  std::optional<double> cosine;
  std::optional<double> rouge1;
  std::optional<double> rouge2;
  std::optional<double> rougeL;
  std::optional<double> bert_p;
  std::optional<double> bert_r;
  std::optional<double> bert_f1;
};

struct LabelScore {
  std::vector<std::pair<std::string, LabelComponents>> per_utterance;  // gold order
  LabelComponents aggregates;  // arithmetic mean over scored utterances
  std::vector<std::string> missing_predictions;  // scored as 0, flagged
  std::vector<std::string> warnings;
};

struct LabelMetricToggles {
  bool cosine = true;
  bool rouge = true;
  bool bertscore = true;
};

// Per-utterance score = max over the dual (specific, vague) references of the
// similarity to the predicted label; corpus aggregate = mean over utterances.
// cosine/bertscore need an embedding provider; pass nullptr to skip them. A
// provider without token mode downgrades bertscore to a warning.
LabelScore label_similarity(const GoldAssignment& gold,
                            const std::unordered_map<std::string, std::string>& predictions,
                            EmbeddingProvider* provider, const LabelMetricToggles& toggles = {});

// ---------------------------------------------------------------------------
// LLM-as-judge guideline adherence

struct RubricSection {
  std::string id;
  std::string title;
  std::string text;
};

struct JudgeRubric {
  std::string name;
  std::vector<RubricSection> sections;
};

// Two built-in variants: a condensed 3-section rubric (word choice / grammar /
// informativeness) and an expanded 2-section one (structural / functional).
const JudgeRubric& builtin_rubric_public();
const JudgeRubric& builtin_rubric_heldout();
JudgeRubric load_rubric(const std::string& path);  // "## id: title" section headers
std::string rubric_to_text(const JudgeRubric& rubric);

struct JudgeConfig {
  int format_retries = 2;
  int max_in_flight = 4;
};

struct JudgeLabelVerdict {
  int cluster_id = -1;
  std::string label;
  std::vector<std::optional<double>> section_scores;  // parallel to rubric sections
  std::optional<double> average;  // unset when any section stayed unscored
  std::vector<ChatExchange> transcript;
};

struct JudgeReport {
  std::vector<std::string> section_ids;
  std::vector<JudgeLabelVerdict> per_label;
  std::vector<double> section_means;  // over fully scored labels
  double overall_mean = 0.0;          // mean of the section means
  int unscored_labels = 0;
};

// One judge call per (label, section); answers parsed from <score> or
// <verdict> tags, retried with a format reminder, unscored labels excluded
// from aggregates and counted. All transcripts are kept for audit.
JudgeReport judge_labels(const std::vector<ThemeLabelResult>& labels, const JudgeRubric& rubric,
                         ChatClient& client, const JudgeConfig& config = {});

// ---------------------------------------------------------------------------
// Aggregated report

struct EvalReport {
  std::optional<double> acc;
  std::optional<double> nmi;
  LabelComponents labels;
  std::vector<std::pair<std::string, double>> judge_sections;  // (section id, mean)
  std::optional<double> judge_avg;
  int scored_utterances = 0;
  int missing_predictions = 0;
  int judge_unscored = 0;
  std::vector<std::string> notes;
};

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

// format "table": fixed column order mirroring the metric tables
// (R-1, R-2, R-L, Cos sim, BERT P/R/F1, LLM s1/s2/avg, ACC, NMI), percentages
// with 2 decimals. format "json": report_to_json, pretty-printed.
std::string render_report(const EvalReport& report, const std::string& format);

}  // namespace themekit
