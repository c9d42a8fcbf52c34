#include <filesystem>
#include <sstream>

#include "themekit/labeling.hpp"
#include "themekit/util.hpp"

namespace themekit {

namespace {

std::unordered_set<std::string> parse_word_list(const std::string& text) {
  std::unordered_set<std::string> words;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string word = trim(line);
    if (word.empty() || word[0] == '#') continue;
    words.insert(lowercase(word));
  }
  return words;
}

const char* const kDeterminers = R"(
a an the each every either neither both all some any another
)";

const char* const kPronouns = R"(
i me my mine myself you your yours yourself yourselves
we us our ours ourselves he him his himself she her hers herself
it its itself they them their theirs themselves
this that these those one
someone anyone everyone somebody anybody everybody nobody
something anything everything nothing
)";

const char* const kFunctionWords = R"(
am is are was were be been being
have has had having do does did done
not isnt arent wasnt werent havent hasnt hadnt
dont doesnt didnt cant wont couldnt wouldnt shouldnt mustnt
theres thats whats
and or but nor so yet
that if whether because since unless although though
can could will would may might must shall should
who what where when why how whom whose which
)";

const char* const kTemporalAdverbs = R"(
yesterday today tomorrow tonight now soon later
currently recently earlier lately
)";

const char* const kCitationExceptions = R"(
bring sing ring ping wing string spring swing cling sting fling wring sling
feed breed speed proceed succeed exceed embed shed shred wed sled need seed
bleed weed
)";

const char* const kVerbs = R"(
access activate add adjust advise answer apply arrange ask assign
authenticate authorize block book browse buy calculate call cancel change
check choose claim clarify close collect combine compare complain complete
confirm connect contact convert correct create customize deactivate decrease
delete deliver deposit diagnose disable discuss dispute downgrade download
earn edit enable enroll escalate estimate exchange expedite explain explore
express extend file find fix flag follow freeze generate get give help
identify increase inquire install investigate join learn link list locate
lock log make manage merge modify monitor move notify obtain open order
pause pay place plan port postpone print process purchase query question
quote raise reactivate rebook receive recover redeem reduce refund register
reinstate remove renew replace report request reschedule reserve reset
resolve restore retrieve return review revoke schedule secure see seek
select sell send set share sign speak split start stop submit subscribe
suspend swap switch sync trace track trade transfer troubleshoot try
unblock understand unenroll unlock unsubscribe update upgrade upload
validate verify view void waive withdraw
)";

std::unordered_set<std::string> parse_inline(const char* words) {
  std::unordered_set<std::string> out;
  std::istringstream in(words);
  std::string word;
  while (in >> word) out.insert(word);
  return out;
}

}  // namespace

const Lexicons& Lexicons::builtin() {
  static const Lexicons instance = [] {
    Lexicons lex;
    lex.determiners = parse_inline(kDeterminers);
    lex.pronouns = parse_inline(kPronouns);
    lex.function_words = parse_inline(kFunctionWords);
    lex.temporal_adverbs = parse_inline(kTemporalAdverbs);
    lex.citation_exceptions = parse_inline(kCitationExceptions);
    lex.verbs = parse_inline(kVerbs);
    return lex;
  }();
  return instance;
}

Lexicons Lexicons::load_dir(const std::string& dir) {
  Lexicons lex = builtin();
  const auto load = [&](const char* name, std::unordered_set<std::string>* target) {
    const std::filesystem::path path = std::filesystem::path(dir) / name;
    if (std::filesystem::exists(path)) {
      *target = parse_word_list(read_file(path.string()));
    }
  };
  load("determiners.txt", &lex.determiners);
  load("pronouns.txt", &lex.pronouns);
  load("function_words.txt", &lex.function_words);
  load("temporal_adverbs.txt", &lex.temporal_adverbs);
  load("citation_exceptions.txt", &lex.citation_exceptions);
  load("verbs.txt", &lex.verbs);
  return lex;
}

}  // namespace themekit
