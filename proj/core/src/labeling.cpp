#include "themekit/labeling.hpp"

#include <algorithm>
#include <cctype>

#include "themekit/errors.hpp"
#include "themekit/util.hpp"

namespace themekit {

const std::string& default_label_prompt_template() {
  static const std::string kTemplate = R"(<task>
You are an expert call center assistant.
You will be given a set of utterances in <utterances> </utterances> tags, each one on a new line.
The utterances are part of call center conversations between the customer and the support agent.
Your task is to generate a short label describing the theme of all the given utterances. The theme label should be under 5 words and describe the desired customer's action in the call.

<guidance>
Output your response in the following way.

<theme_label_explanation>
Your short step-by-step explanation behind the theme
</theme_label_explanation>

<theme_label>
your theme label
</theme_label>

</guidance>
</task>

H:
<utterances>
{utterances}
</utterances>
)";
  return kTemplate;
}

LabelPrompt build_label_prompt(const std::vector<std::string>& utterances,
                               std::optional<std::size_t> cap, const std::string& template_text) {
  if (utterances.empty()) throw DomainError("build_label_prompt: empty utterance list");
  if (cap && *cap == 0) throw ConfigError("build_label_prompt: cap must be positive");

  LabelPrompt prompt;
  prompt.template_text = template_text;
  const std::size_t keep = cap ? std::min(*cap, utterances.size()) : utterances.size();
  prompt.utterances.assign(utterances.begin(), utterances.begin() + keep);
  prompt.truncated = utterances.size() - keep;

  const std::string slot = "{utterances}";
  const auto pos = template_text.find(slot);
  if (pos == std::string::npos) {
    throw FormatError("label prompt template is missing the {utterances} slot");
  }
  std::string block;
  for (std::size_t i = 0; i < prompt.utterances.size(); ++i) {
    if (i > 0) block += '\n';
    block += prompt.utterances[i];
  }
  prompt.rendered = template_text;
  prompt.rendered.replace(pos, slot.size(), block);
  return prompt;
}

std::optional<std::string> extract_tag(const std::string& text, const std::string& tag) {
  const std::string open = "<" + tag + ">";
  const std::string close = "</" + tag + ">";
  const auto begin = text.find(open);
  if (begin == std::string::npos) return std::nullopt;
  const auto end = text.find(close, begin + open.size());
  if (end == std::string::npos) return std::nullopt;
  return text.substr(begin + open.size(), end - begin - open.size());
}

ThemeLabelResult generate_label(const LabelPrompt& prompt, ChatClient& client,
                                const LabelGenConfig& config) {
  std::vector<ChatMessage> messages{{"user", prompt.rendered}};
  ThemeLabelResult result;

  for (int attempt = 0; attempt <= config.format_retries; ++attempt) {
    nlohmann::json request = nlohmann::json::array();
    for (const ChatMessage& m : messages) {
      request.push_back({{"role", m.role}, {"content", m.content}});
    }
    const std::string response = client.complete(messages);
    result.transcript.push_back({std::move(request), response});
    result.raw_response = response;

    if (const auto label = extract_tag(response, "theme_label")) {
      const std::string trimmed = trim(*label);
      if (!trimmed.empty()) {
        result.label = trimmed;
        if (const auto explanation = extract_tag(response, "theme_label_explanation")) {
          result.explanation = trim(*explanation);
        }
        return result;
      }
    }
    if (attempt == 0) {
      messages.push_back({"system",
                          "Format reminder: answer with the theme label wrapped in "
                          "<theme_label> </theme_label> tags, preceded by a short "
                          "<theme_label_explanation> </theme_label_explanation> block."});
    }
  }
  throw ParseError("no <theme_label> tags after " + std::to_string(config.format_retries + 1) +
                   " attempts; last response: " + result.raw_response);
}

// ---------------------------------------------------------------------------
// Validator

namespace {

// Lowercases and strips surrounding punctuation; internal hyphens and
// apostrophes survive ("check-in" stays one token). Apostrophes are dropped
// so contractions like "didn't" match their closed-list forms.
std::string normalize_token(const std::string& raw) {
  std::string out;
  for (unsigned char c : raw) {
    if (std::isalnum(c) || c == '-') out.push_back(static_cast<char>(std::tolower(c)));
  }
  // trim leading/trailing hyphens left over from punctuation runs
  const auto first = out.find_first_not_of('-');
  if (first == std::string::npos) return "";
  const auto last = out.find_last_not_of('-');
  return out.substr(first, last - first + 1);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

const std::unordered_set<std::string> kTimeNouns = {
    "week",   "month",  "year",   "day",     "weekend", "morning", "afternoon",
    "evening", "night", "monday", "tuesday", "wednesday", "thursday", "friday",
    "saturday", "sunday"};

}  // namespace

const RuleResult* ValidationVerdict::rule(const std::string& id) const {
  for (const RuleResult& r : rules) {
    if (r.rule == id) return &r;
  }
  return nullptr;
}

ValidationVerdict validate_label(const std::string& label, const Lexicons& lexicons,
                                 const ValidatorOptions& options) {
  if (trim(label).empty()) throw DomainError("validate_label: empty label");

  ValidationVerdict verdict;
  verdict.label = label;

  const std::vector<std::string> raw_tokens = split_whitespace(label);
  std::vector<std::string> tokens;
  tokens.reserve(raw_tokens.size());
  for (const std::string& t : raw_tokens) tokens.push_back(normalize_token(t));

  auto add_rule = [&](std::string id, std::string description, bool advisory = false) -> RuleResult& {
    verdict.rules.push_back({std::move(id), std::move(description), true, advisory, {}});
    return verdict.rules.back();
  };

  {
    RuleResult& r1 = add_rule("R1", "label is 2-5 words long");
    if (raw_tokens.size() < 2 || raw_tokens.size() > 5) {
      r1.passed = false;
      r1.offending.push_back(std::to_string(raw_tokens.size()) + " words");
    }
  }
  {
    RuleResult& r2 = add_rule("R2", "no articles or determiners");
    for (const std::string& t : tokens) {
      if (lexicons.determiners.count(t)) r2.offending.push_back(t);
    }
    r2.passed = r2.offending.empty();
  }
  {
    RuleResult& r3 = add_rule("R3", "no pronouns, demonstratives or context-sensitive words");
    for (const std::string& t : tokens) {
      if (lexicons.pronouns.count(t)) r3.offending.push_back(t);
    }
    r3.passed = r3.offending.empty();
  }
  {
    RuleResult& r4 = add_rule(
        "R4", "no auxiliaries, copulas, negation, conjunctions, complementizers, modals or wh-words");
    for (const std::string& t : tokens) {
      if (lexicons.function_words.count(t)) r4.offending.push_back(t);
    }
    r4.passed = r4.offending.empty();
  }
  {
    RuleResult& r5 = add_rule("R5", "no context-sensitive temporal adverbs");
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (lexicons.temporal_adverbs.count(tokens[i])) r5.offending.push_back(tokens[i]);
      if ((tokens[i] == "next" || tokens[i] == "last") && i + 1 < tokens.size() &&
          kTimeNouns.count(tokens[i + 1])) {
        r5.offending.push_back(tokens[i] + " " + tokens[i + 1]);
      }
    }
    r5.passed = r5.offending.empty();
  }
  {
    RuleResult& r6 = add_rule("R6", "first word is not inflected with -ing/-ed (citation form)");
    if (!tokens.empty() && !tokens[0].empty()) {
      const std::string& first = tokens[0];
      if ((ends_with(first, "ing") || ends_with(first, "ed")) &&
          !lexicons.citation_exceptions.count(first)) {
        r6.passed = false;
        r6.offending.push_back(first);
      }
    }
  }
  {
    RuleResult& r7 =
        add_rule("R7", "first word is a known verb (verb-phrase heuristic)",
                 /*advisory=*/!options.enforce_verb_rule);
    if (tokens.empty() || tokens[0].empty() || !lexicons.verbs.count(tokens[0])) {
      r7.passed = false;
      if (!tokens.empty()) r7.offending.push_back(tokens[0]);
    }
  }

  verdict.passed = std::all_of(verdict.rules.begin(), verdict.rules.end(),
                               [](const RuleResult& r) { return r.passed || r.advisory; });
  return verdict;
}

}  // namespace themekit
