#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

namespace themekit {

// ---------------------------------------------------------------------------
// Prompt construction

struct LabelPrompt {
  std::string template_text;
  std::vector<std::string> utterances;  // the ones actually included
  std::size_t truncated = 0;            // dropped by the cap, when any
  std::string rendered;
};

// The default cluster-labeling prompt. Instructs the model to answer with
// <theme_label_explanation> and <theme_label> tags.
const std::string& default_label_prompt_template();

// Renders the template's {utterances} slot, one utterance per line. cap, when
// given, keeps only the first cap utterances; cap == 0 is a config error.
LabelPrompt build_label_prompt(const std::vector<std::string>& utterances,
                               std::optional<std::size_t> cap = std::nullopt,
                               const std::string& template_text = default_label_prompt_template());

// ---------------------------------------------------------------------------
// Chat-completion client

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

struct ChatServiceConfig {
  std::string endpoint;  // e.g. "http://127.0.0.1:8081/v1/chat/completions"
  std::string model = "default";
  double temperature = 0.0;  // labeling runs want reproducibility
  std::string auth_env = "THEMEKIT_CHAT_TOKEN";
  int max_retries = 3;
  int backoff_initial_ms = 100;
  double backoff_factor = 2.0;
  int timeout_sec = 60;
  int max_in_flight = 4;
};

// HTTP chat client. Request: {"model", "messages": [{"role", "content"}],
// "temperature"}. Accepts either {"content": ...} or the OpenAI-style
// {"choices": [{"message": {"content": ...}}]} response shape.
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(ChatServiceConfig config);
  ~HttpChatClient() override;

  std::string complete(const std::vector<ChatMessage>& messages) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Label generation

struct ChatExchange {
  nlohmann::json request;
  std::string response;
};

struct ThemeLabelResult {
  int cluster_id = -1;
  std::string label;        // verbatim content of the <theme_label> tags, trimmed
  std::string explanation;  // content of <theme_label_explanation>, when present
  std::string raw_response;
  std::vector<ChatExchange> transcript;
};

struct LabelGenConfig {
  // Extra attempts after a response without label tags; each retry adds a
  // format-reminder system message.
  int format_retries = 2;
};

// ParseError when the tags are still missing after the retries; the raw
// response is carried in the message.
ThemeLabelResult generate_label(const LabelPrompt& prompt, ChatClient& client,
                                const LabelGenConfig& config = {});

// Returns the content of the first <tag>...</tag> block, or nullopt.
std::optional<std::string> extract_tag(const std::string& text, const std::string& tag);

// ---------------------------------------------------------------------------
// Guideline validator

// Closed-class word lists backing the deterministic label checks. The builtin
// bundle ships as plain-text files under data/wordlists/ as well; load_dir
// overrides any list for which a file exists.
struct Lexicons {
  std::unordered_set<std::string> determiners;
  std::unordered_set<std::string> pronouns;           // incl. demonstratives, "one"
  std::unordered_set<std::string> function_words;     // aux/copula/negation/conj/comp/modal/wh
  std::unordered_set<std::string> temporal_adverbs;
  std::unordered_set<std::string> citation_exceptions;  // -ing/-ed words that are base forms
  std::unordered_set<std::string> verbs;              // citation forms for the verb-initial rule

  static const Lexicons& builtin();
  static Lexicons load_dir(const std::string& dir);
};

struct ValidatorOptions {
  // R7 (label starts with a known verb) is advisory unless enforced: the
  // bundled lexicon cannot cover every domain verb.
  bool enforce_verb_rule = false;
};

struct RuleResult {
  std::string rule;  // "R1".."R7"
  std::string description;
  bool passed = true;
  bool advisory = false;
  std::vector<std::string> offending;
};

struct ValidationVerdict {
  std::string label;
  std::vector<RuleResult> rules;
  bool passed = true;  // all non-advisory rules pass

  const RuleResult* rule(const std::string& id) const;
};

// Deterministic structural checks from the labeling guideline:
//   R1 2-5 words; R2 no articles/determiners; R3 no pronouns/demonstratives/
//   context-sensitive words; R4 no auxiliaries, copulas, negation,
//   conjunctions, complementizers, modals or question words; R5 no temporal
//   adverbs; R6 first word not inflected with -ing/-ed; R7 first word is a
//   known verb (advisory by default).
// Semantic criteria (informative/actionable/granularity) are the judge's job.
ValidationVerdict validate_label(const std::string& label,
                                 const Lexicons& lexicons = Lexicons::builtin(),
                                 const ValidatorOptions& options = {});

}  // namespace themekit
