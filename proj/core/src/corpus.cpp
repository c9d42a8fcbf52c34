#include "themekit/corpus.hpp"

#include <set>
#include <sstream>

#include "themekit/util.hpp"

namespace themekit {

using nlohmann::json;

std::string to_string(Speaker s) {
  return s == Speaker::Agent ? "Agent" : "Customer";
}

Speaker speaker_from_string(const std::string& s) {
  if (s == "Agent") return Speaker::Agent;
  if (s == "Customer") return Speaker::Customer;
  throw SchemaError("unknown speaker value: \"" + s + "\" (expected \"Agent\" or \"Customer\")");
}

std::string Uid::key() const {
  return conversation_id + "#" + std::to_string(turn_index);
}

Uid Uid::from_key(const std::string& key) {
  const auto pos = key.rfind('#');
  if (pos == std::string::npos || pos + 1 >= key.size()) {
    throw FormatError("bad uid key: \"" + key + "\"");
  }
  Uid uid;
  uid.conversation_id = key.substr(0, pos);
  try {
    uid.turn_index = std::stoi(key.substr(pos + 1));
  } catch (const std::exception&) {
    throw FormatError("bad uid key: \"" + key + "\"");
  }
  return uid;
}

std::vector<std::string> ThemedUtterance::references() const {
  std::vector<std::string> refs;
  if (gold_specific) refs.push_back(*gold_specific);
  if (gold_vague) refs.push_back(*gold_vague);
  return refs;
}

namespace {

// Splits file content into top-level JSON values. Accepts a JSON array, a
// single object, or JSON-lines. Reported byte offsets are absolute.
std::vector<json> parse_json_values(const std::string& text) {
  const auto first_non_ws = text.find_first_not_of(" \t\r\n");
  if (first_non_ws == std::string::npos) {
    throw ParseError("empty input, expected JSON", 0);
  }

  if (text[first_non_ws] == '[') {
    try {
      json doc = json::parse(text);
      return std::vector<json>(doc.begin(), doc.end());
    } catch (const json::parse_error& e) {
      throw ParseError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what(),
                       e.byte);
    }
  }

  // JSON-lines only if the first non-blank line is a complete value on its
  // own; otherwise the file is one pretty-printed value.
  const auto line_end = text.find('\n', first_non_ws);
  const std::string first_line =
      text.substr(first_non_ws, line_end == std::string::npos ? std::string::npos
                                                              : line_end - first_non_ws);
  const bool jsonl = json::accept(first_line);

  if (!jsonl) {
    try {
      return {json::parse(text)};
    } catch (const json::parse_error& e) {
      throw ParseError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what(),
                       e.byte);
    }
  }

  std::vector<json> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::size_t end = nl == std::string::npos ? text.size() : nl;
    const std::string line = text.substr(pos, end - pos);
    if (!trim(line).empty()) {
      try {
        values.push_back(json::parse(line));
      } catch (const json::parse_error& e) {
        const std::size_t abs = pos + (e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError("malformed JSON at byte " + std::to_string(abs) + ": " + e.what(), abs);
      }
    }
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return values;
}

const char* const kTurnKnownKeys[] = {"speaker", "utterance", "theme_label",
                                      "theme_label_vague", "themed", "uid"};

bool turn_key_known(const std::string& key) {
  for (const char* k : kTurnKnownKeys) {
    if (key == k) return true;
  }
  return false;
}

std::optional<std::string> optional_string_field(const json& obj, const std::string& field,
                                                 const std::string& context) {
  if (!obj.contains(field) || obj.at(field).is_null()) return std::nullopt;
  if (!obj.at(field).is_string()) {
    throw SchemaError(context + ": field \"" + field + "\" must be a string or null");
  }
  return obj.at(field).get<std::string>();
}

Turn turn_from_json(const json& j, const std::string& conversation_id, std::size_t turn_index) {
  const std::string context =
      "conversation \"" + conversation_id + "\" turn " + std::to_string(turn_index);
  if (!j.is_object()) throw SchemaError(context + ": turn must be an object");

  Turn turn;
  if (!j.contains("speaker") || !j.at("speaker").is_string()) {
    throw SchemaError(context + ": missing required field \"speaker\"");
  }
  turn.speaker = speaker_from_string(j.at("speaker").get<std::string>());

  if (!j.contains("utterance") || !j.at("utterance").is_string()) {
    throw SchemaError(context + ": missing required field \"utterance\"");
  }
  turn.utterance = j.at("utterance").get<std::string>();
  if (turn.utterance.empty()) {
    throw SchemaError(context + ": field \"utterance\" must be non-empty");
  }

  turn.theme_label = optional_string_field(j, "theme_label", context);
  turn.theme_label_vague = optional_string_field(j, "theme_label_vague", context);
  if (turn.theme_label_vague && !turn.theme_label) {
    throw SchemaError(context + ": \"theme_label_vague\" requires \"theme_label\"");
  }

  bool explicit_flag = false;
  if (j.contains("themed")) {
    if (!j.at("themed").is_boolean()) {
      throw SchemaError(context + ": field \"themed\" must be a boolean");
    }
    explicit_flag = j.at("themed").get<bool>();
    if (!explicit_flag && turn.theme_label) {
      throw SchemaError(context + ": \"themed\": false contradicts a present \"theme_label\"");
    }
  }
  turn.themed = explicit_flag || turn.theme_label.has_value();

  for (const auto& [key, value] : j.items()) {
    if (!turn_key_known(key)) turn.extras[key] = value;
  }
  return turn;
}

Dialog dialog_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("dialog datapoint must be a JSON object");
  if (!j.contains("conversation_id") || !j.at("conversation_id").is_string()) {
    throw SchemaError("dialog datapoint: missing required field \"conversation_id\"");
  }
  Dialog dialog;
  dialog.conversation_id = j.at("conversation_id").get<std::string>();

  if (!j.contains("turns") || !j.at("turns").is_array()) {
    throw SchemaError("conversation \"" + dialog.conversation_id +
                      "\": missing required field \"turns\"");
  }
  const auto& turns = j.at("turns");
  if (turns.empty()) {
    throw SchemaError("conversation \"" + dialog.conversation_id + "\": \"turns\" must be non-empty");
  }
  dialog.turns.reserve(turns.size());
  for (std::size_t i = 0; i < turns.size(); ++i) {
    dialog.turns.push_back(turn_from_json(turns[i], dialog.conversation_id, i));
  }

  for (const auto& [key, value] : j.items()) {
    if (key != "conversation_id" && key != "turns") dialog.extras[key] = value;
  }
  return dialog;
}

}  // namespace

std::vector<Dialog> parse_corpus_text(const std::string& text) {
  std::vector<Dialog> corpus;
  std::set<std::string> seen_ids;
  for (const json& value : parse_json_values(text)) {
    Dialog dialog = dialog_from_json(value);
    if (!seen_ids.insert(dialog.conversation_id).second) {
      throw IntegrityError("duplicate conversation_id: \"" + dialog.conversation_id + "\"");
    }
    corpus.push_back(std::move(dialog));
  }
  return corpus;
}

std::vector<Dialog> parse_corpus(const std::string& path) {
  return parse_corpus_text(read_file(path));
}

std::vector<ThemedUtterance> extract_themed(const std::vector<Dialog>& corpus) {
  std::vector<ThemedUtterance> out;
  for (const Dialog& dialog : corpus) {
    for (std::size_t i = 0; i < dialog.turns.size(); ++i) {
      const Turn& turn = dialog.turns[i];
      if (!turn.themed) continue;
      ThemedUtterance u;
      u.uid = Uid{dialog.conversation_id, static_cast<int>(i)};
      u.text = turn.utterance;
      u.gold_specific = turn.theme_label;
      u.gold_vague = turn.theme_label_vague;
      out.push_back(std::move(u));
    }
  }
  return out;
}

ThemedIndex::ThemedIndex(std::vector<ThemedUtterance> items) : items_(std::move(items)) {
  by_key_.reserve(items_.size());
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!by_key_.emplace(items_[i].uid.key(), i).second) {
      throw IntegrityError("duplicate themed utterance uid: " + items_[i].uid.key());
    }
  }
}

ThemedIndex ThemedIndex::from_corpus(const std::vector<Dialog>& corpus) {
  return ThemedIndex(extract_themed(corpus));
}

const ThemedUtterance* ThemedIndex::find(const Uid& uid) const {
  return find(uid.key());
}

const ThemedUtterance* ThemedIndex::find(const std::string& key) const {
  const auto it = by_key_.find(key);
  return it == by_key_.end() ? nullptr : &items_[it->second];
}

const ThemedUtterance& ThemedIndex::at(const Uid& uid) const {
  return at(uid.key());
}

const ThemedUtterance& ThemedIndex::at(const std::string& key) const {
  const ThemedUtterance* u = find(key);
  if (u == nullptr) {
    throw ResolutionError("uid " + key + " does not resolve to a themed utterance");
  }
  return *u;
}

namespace {

Uid preference_endpoint(const json& j, const std::string& field, const ThemedIndex& index,
                        const PreferenceParseOptions& opts) {
  if (!j.contains(field) || !j.at(field).is_object()) {
    throw SchemaError("preference datapoint: missing required field \"" + field + "\"");
  }
  const json& ep = j.at(field);
  if (!ep.contains("conversation_id") || !ep.at("conversation_id").is_string()) {
    throw SchemaError("preference \"" + field + "\": missing required field \"conversation_id\"");
  }
  if (!ep.contains("turn_id") || !ep.at("turn_id").is_number_integer()) {
    throw SchemaError("preference \"" + field + "\": missing required field \"turn_id\"");
  }
  Uid uid;
  uid.conversation_id = ep.at("conversation_id").get<std::string>();
  uid.turn_index = ep.at("turn_id").get<int>() - (opts.one_based_turn_ids ? 1 : 0);
  index.at(uid);  // ResolutionError when dangling
  return uid;
}

}  // namespace

std::vector<PreferencePair> parse_preferences_text(const std::string& text, const ThemedIndex& index,
                                                   const PreferenceParseOptions& opts) {
  std::vector<PreferencePair> pairs;
  for (const json& value : parse_json_values(text)) {
    if (!value.is_object()) throw SchemaError("preference datapoint must be a JSON object");
    PreferencePair pair;
    pair.a = preference_endpoint(value, "utterance_a", index, opts);
    pair.b = preference_endpoint(value, "utterance_b", index, opts);
    if (pair.a == pair.b) {
      throw IntegrityError("preference pair references the same utterance twice: " + pair.a.key());
    }
    if (!value.contains("belong_to_same_theme") || !value.at("belong_to_same_theme").is_string()) {
      throw SchemaError("preference datapoint: missing required field \"belong_to_same_theme\"");
    }
    const std::string flag = value.at("belong_to_same_theme").get<std::string>();
    if (flag == "yes") {
      pair.same_theme = true;
    } else if (flag == "no") {
      pair.same_theme = false;
    } else {
      throw SchemaError("\"belong_to_same_theme\" must be \"yes\" or \"no\", got \"" + flag + "\"");
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<PreferencePair> parse_preferences(const std::string& path, const ThemedIndex& index,
                                              const PreferenceParseOptions& opts) {
  return parse_preferences_text(read_file(path), index, opts);
}

json corpus_to_json(const std::vector<Dialog>& corpus) {
  json out = json::array();
  for (const Dialog& dialog : corpus) {
    json jd = dialog.extras.is_object() ? dialog.extras : json::object();
    jd["conversation_id"] = dialog.conversation_id;
    json turns = json::array();
    for (std::size_t i = 0; i < dialog.turns.size(); ++i) {
      const Turn& turn = dialog.turns[i];
      json jt = turn.extras.is_object() ? turn.extras : json::object();
      jt["speaker"] = to_string(turn.speaker);
      jt["utterance"] = turn.utterance;
      if (turn.theme_label) jt["theme_label"] = *turn.theme_label;
      if (turn.theme_label_vague) jt["theme_label_vague"] = *turn.theme_label_vague;
      if (turn.themed && !turn.theme_label) jt["themed"] = true;
      if (turn.themed) jt["uid"] = Uid{dialog.conversation_id, static_cast<int>(i)}.key();
      turns.push_back(std::move(jt));
    }
    jd["turns"] = std::move(turns);
    out.push_back(std::move(jd));
  }
  return out;
}

void save_corpus(const std::vector<Dialog>& corpus, const std::string& path) {
  write_file(path, corpus_to_json(corpus).dump(2) + "\n");
}

json preferences_to_json(const std::vector<PreferencePair>& pairs, const ThemedIndex& index,
                         const PreferenceParseOptions& opts) {
  const int base = opts.one_based_turn_ids ? 1 : 0;
  json out = json::array();
  for (const PreferencePair& pair : pairs) {
    const ThemedUtterance& a = index.at(pair.a);
    const ThemedUtterance& b = index.at(pair.b);
    json jp;
    jp["utterance_a"] = {{"utterance", a.text},
                         {"conversation_id", pair.a.conversation_id},
                         {"turn_id", pair.a.turn_index + base}};
    jp["utterance_b"] = {{"utterance", b.text},
                         {"conversation_id", pair.b.conversation_id},
                         {"turn_id", pair.b.turn_index + base}};
    jp["belong_to_same_theme"] = pair.same_theme ? "yes" : "no";
    out.push_back(std::move(jp));
  }
  return out;
}

void save_preferences(const std::vector<PreferencePair>& pairs, const ThemedIndex& index,
                      const std::string& path, const PreferenceParseOptions& opts) {
  write_file(path, preferences_to_json(pairs, index, opts).dump(2) + "\n");
}

}  // namespace themekit
