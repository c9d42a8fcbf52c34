#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "themekit/errors.hpp"
#include "themekit/evaluation.hpp"
#include "themekit/util.hpp"

namespace themekit {

const JudgeRubric& builtin_rubric_public() {
  static const JudgeRubric rubric = {
      "public-3section",
      {
          {"word_choice", "Conciseness and word choice",
           "The theme label is concise, 2 to 5 words long. It contains only essential "
           "content words: nouns, main verbs, adjectives and modifiers. It excludes "
           "function words (articles, determiners, auxiliary verbs, copulas, negation, "
           "conjunctions, complementizers, modals, question words) and context-sensitive "
           "words (pronouns, demonstratives, temporal adverbs such as yesterday or "
           "tomorrow). Prepositions appear only when no equally clear alternative "
           "without one exists."},
          {"grammar", "Grammatical structure",
           "The theme label is a verb phrase: it begins with a verb in citation (base) "
           "form, with no tense or agreement morphology, optionally followed by the "
           "verb's arguments or modifiers. It is not a noun phrase or a full clause, "
           "and it describes a class of events rather than a state, an entity, a "
           "property, or a claim."},
          {"informativeness", "Informativeness and actionability",
           "The theme label is informative enough to substantially narrow down the set "
           "of steps needed to resolve the customer's issue, yet general enough to "
           "cover a whole group of similar requests. It is neither excessively vague "
           "nor overly specific, and it would be useful to an analyst categorizing "
           "conversations."},
      }};
  return rubric;
}

const JudgeRubric& builtin_rubric_heldout() {
  static const JudgeRubric rubric = {
      "heldout-2section",
      {
          {"structural", "Theme label as a linguistic expression",
           "Judge the label's form. It must be concise (2-5 words) and consist of "
           "essential content words only: no articles or determiners, no auxiliary "
           "verbs or copulas, no negation, conjunctions, complementizers, modals or "
           "question words, no pronouns, demonstratives or other context-dependent "
           "words such as temporal adverbs. Prepositions are acceptable only when no "
           "equally clear preposition-free phrasing exists. The label must be a verb "
           "phrase whose head verb is in citation (base) form, not a noun phrase, a "
           "clause, or an inflected form."},
          {"functional", "Theme label as an analytical tool",
           "Judge the label's usefulness for conversation analytics. It must describe "
           "a class of events (something that happens), accurately capture the core "
           "customer intent, and be informative and actionable: specific enough to "
           "substantially narrow down the resolution steps, general enough to group "
           "similar requests, phrased in domain-appropriate terminology, and "
           "distinguishable from the other theme labels in the set."},
      }};
  return rubric;
}

JudgeRubric load_rubric(const std::string& path) {
  JudgeRubric rubric;
  rubric.name = path;
  std::istringstream in(read_file(path));
  std::string line;
  RubricSection current;
  bool open = false;
  auto flush = [&] {
    if (open) {
      current.text = trim(current.text);
      rubric.sections.push_back(current);
    }
    current = {};
  };
  while (std::getline(in, line)) {
    if (line.rfind("## ", 0) == 0) {
      flush();
      const std::string header = trim(line.substr(3));
      const auto colon = header.find(':');
      if (colon == std::string::npos) {
        throw FormatError("rubric section header must look like \"## id: title\": " + line);
      }
      current.id = trim(header.substr(0, colon));
      current.title = trim(header.substr(colon + 1));
      open = true;
    } else if (open) {
      current.text += line;
      current.text += '\n';
    }
  }
  flush();
  if (rubric.sections.empty()) {
    throw FormatError("rubric file has no \"## id: title\" sections: " + path);
  }
  return rubric;
}

std::string rubric_to_text(const JudgeRubric& rubric) {
  std::string out;
  for (const RubricSection& s : rubric.sections) {
    out += "## " + s.id + ": " + s.title + "\n" + s.text + "\n\n";
  }
  return out;
}

namespace {

std::string judge_prompt(const RubricSection& section, const std::string& label) {
  std::string prompt;
  prompt += "You are reviewing theme labels produced for call center conversation analytics.\n";
  prompt += "Judge the theme label below against this rubric section only.\n\n";
  prompt += "<rubric section=\"" + section.id + "\" title=\"" + section.title + "\">\n";
  prompt += section.text + "\n</rubric>\n\n";
  prompt += "<label>" + label + "</label>\n\n";
  prompt +=
      "Answer with <verdict>pass</verdict> or <verdict>fail</verdict>. If the label "
      "only partially satisfies the section, answer with a fractional "
      "<score>0.0-1.0</score> instead.";
  return prompt;
}

std::optional<double> parse_judge_answer(const std::string& response) {
  if (const auto score = extract_tag(response, "score")) {
    try {
      const double v = std::stod(trim(*score));
      if (std::isfinite(v)) return std::clamp(v, 0.0, 1.0);
    } catch (const std::exception&) {
      return std::nullopt;
    }
    return std::nullopt;
  }
  if (const auto verdict = extract_tag(response, "verdict")) {
    const std::string v = lowercase(trim(*verdict));
    if (v == "pass") return 1.0;
    if (v == "fail") return 0.0;
  }
  return std::nullopt;
}

}  // namespace

JudgeReport judge_labels(const std::vector<ThemeLabelResult>& labels, const JudgeRubric& rubric,
                         ChatClient& client, const JudgeConfig& config) {
  if (rubric.sections.empty()) throw ConfigError("judge rubric has no sections");

  JudgeReport report;
  for (const RubricSection& s : rubric.sections) report.section_ids.push_back(s.id);
  report.per_label.resize(labels.size());

  std::mutex mutex;  // guards transcripts assembled by concurrent judge calls

  const std::size_t sections = rubric.sections.size();
  parallel_for_indexed(labels.size() * sections, config.max_in_flight, [&](std::size_t idx) {
    const std::size_t li = idx / sections;
    const std::size_t si = idx % sections;

    std::vector<ChatMessage> messages{{"user", judge_prompt(rubric.sections[si], labels[li].label)}};
    std::optional<double> score;
    std::vector<ChatExchange> exchanges;
    for (int attempt = 0; attempt <= config.format_retries && !score; ++attempt) {
      nlohmann::json request = nlohmann::json::array();
      for (const ChatMessage& m : messages) {
        request.push_back({{"role", m.role}, {"content", m.content}});
      }
      const std::string response = client.complete(messages);
      exchanges.push_back({std::move(request), response});
      score = parse_judge_answer(response);
      if (!score && attempt == 0) {
        messages.push_back({"system",
                            "Format reminder: answer with <verdict>pass</verdict>, "
                            "<verdict>fail</verdict>, or a fractional <score>...</score>."});
      }
    }

    std::lock_guard<std::mutex> lock(mutex);
    JudgeLabelVerdict& verdict = report.per_label[li];
    verdict.cluster_id = labels[li].cluster_id;
    verdict.label = labels[li].label;
    verdict.section_scores.resize(sections);
    verdict.section_scores[si] = score;
    for (ChatExchange& e : exchanges) verdict.transcript.push_back(std::move(e));
  });

  // Aggregate over fully scored labels; the rest are counted, not averaged.
  std::vector<double> sums(sections, 0.0);
  std::size_t scored = 0;
  for (JudgeLabelVerdict& verdict : report.per_label) {
    verdict.section_scores.resize(sections);
    const bool complete = std::all_of(verdict.section_scores.begin(), verdict.section_scores.end(),
                                      [](const std::optional<double>& s) { return s.has_value(); });
    if (!complete) {
      ++report.unscored_labels;
      continue;
    }
    double sum = 0.0;
    for (std::size_t si = 0; si < sections; ++si) {
      sums[si] += *verdict.section_scores[si];
      sum += *verdict.section_scores[si];
    }
    verdict.average = sum / static_cast<double>(sections);
    ++scored;
  }
  report.section_means.assign(sections, 0.0);
  if (scored > 0) {
    for (std::size_t si = 0; si < sections; ++si) {
      report.section_means[si] = sums[si] / static_cast<double>(scored);
    }
    double total = 0.0;
    for (double m : report.section_means) total += m;
    report.overall_mean = total / static_cast<double>(sections);
  }
  return report;
}

}  // namespace themekit
