#pragma once

#include <compare>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "themekit/errors.hpp"

namespace themekit {

enum class Speaker { Agent, Customer };

std::string to_string(Speaker s);
Speaker speaker_from_string(const std::string& s);  // SchemaError on unknown value

struct Turn {
  Speaker speaker = Speaker::Customer;
  std::string utterance;
  std::optional<std::string> theme_label;        // specific reference label
  std::optional<std::string> theme_label_vague;  // only ever present with theme_label
  bool themed = false;
  nlohmann::json extras = nlohmann::json::object();  // unknown fields, kept for round-trips

  bool operator==(const Turn&) const = default;
};

struct Dialog {
  std::string conversation_id;
  std::vector<Turn> turns;
  nlohmann::json extras = nlohmann::json::object();

  bool operator==(const Dialog&) const = default;
};

// Identity of a themed utterance: (conversation_id, 0-based turn index).
struct Uid {
  std::string conversation_id;
  int turn_index = 0;

  std::string key() const;  // "<conversation_id>#<turn_index>"
  static Uid from_key(const std::string& key);  // FormatError on bad input

  auto operator<=>(const Uid&) const = default;
};

struct ThemedUtterance {
  Uid uid;
  std::string text;
  std::optional<std::string> gold_specific;
  std::optional<std::string> gold_vague;

  bool has_gold() const { return gold_specific.has_value(); }
  // Reference labels for scoring, specific first.
  std::vector<std::string> references() const;

  bool operator==(const ThemedUtterance&) const = default;
};

// A should-link (same_theme) or cannot-link granularity constraint.
struct PreferencePair {
  Uid a;
  Uid b;
  bool same_theme = false;

  bool operator==(const PreferencePair&) const = default;
};

// Accepts a JSON array of dialog objects, a single dialog object, or
// JSON-lines with one dialog per line.
std::vector<Dialog> parse_corpus(const std::string& path);
std::vector<Dialog> parse_corpus_text(const std::string& text);

std::vector<ThemedUtterance> extract_themed(const std::vector<Dialog>& corpus);

// Lookup table over the themed working set, in document order.
class ThemedIndex {
 public:
  ThemedIndex() = default;
  explicit ThemedIndex(std::vector<ThemedUtterance> items);  // IntegrityError on duplicate uid

  static ThemedIndex from_corpus(const std::vector<Dialog>& corpus);

  const std::vector<ThemedUtterance>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  const ThemedUtterance* find(const Uid& uid) const;
  const ThemedUtterance* find(const std::string& key) const;
  const ThemedUtterance& at(const Uid& uid) const;  // ResolutionError when missing
  const ThemedUtterance& at(const std::string& key) const;

 private:
  std::vector<ThemedUtterance> items_;
  std::unordered_map<std::string, std::size_t> by_key_;
};

struct PreferenceParseOptions {
  // Preference files carry 0-based turn ids by default; flip for 1-based data.
  bool one_based_turn_ids = false;
};

std::vector<PreferencePair> parse_preferences(const std::string& path, const ThemedIndex& index,
                                              const PreferenceParseOptions& opts = {});
std::vector<PreferencePair> parse_preferences_text(const std::string& text, const ThemedIndex& index,
                                                   const PreferenceParseOptions& opts = {});

// Normalized serialization. Themed turns additionally carry a computed "uid".
nlohmann::json corpus_to_json(const std::vector<Dialog>& corpus);
void save_corpus(const std::vector<Dialog>& corpus, const std::string& path);

nlohmann::json preferences_to_json(const std::vector<PreferencePair>& pairs, const ThemedIndex& index,
                                   const PreferenceParseOptions& opts = {});
void save_preferences(const std::vector<PreferencePair>& pairs, const ThemedIndex& index,
                      const std::string& path, const PreferenceParseOptions& opts = {});

}  // namespace themekit
