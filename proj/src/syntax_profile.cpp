#include "specmt/syntax_profile.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include "specmt/error.hpp"
#include "specmt/text.hpp"

namespace specmt::syntax {
namespace {

using WordSet = std::set<std::string, std::less<>>;

const WordSet kDeterminers = {"the",  "a",    "an",   "our",  "its",     "their", "his",  "her",  "my",
                              "your", "this", "that", "these", "those",  "each",  "every", "some", "many",
                              "all",  "no",   "any",  "both", "such",    "several", "most", "another", "few"};

const WordSet kPrepositions = {"of",      "in",      "on",     "at",      "by",     "for",     "with",   "from",
                               "to",      "into",    "onto",   "about",   "over",   "under",   "between", "among",
                               "through", "during",  "before", "after",   "around", "across",  "against", "without",
                               "within",  "toward",  "towards", "upon",   "since",  "until",   "as",      "than",
                               "per",     "via",     "like",   "near",    "throughout", "beyond", "behind", "above",
                               "below",   "despite", "along",  "beside",  "inside", "outside", "regarding"};

const WordSet kOtherFunction = {"and",  "or",    "but",   "nor",     "so",     "yet",   "if",    "because", "while",
                                "although", "though", "whether", "when", "where", "which", "who", "whom", "whose",
                                "what", "how",   "why",   "not",     "also",   "very",  "too",   "then",    "just",
                                "only", "even",  "still", "already", "now",    "always", "never", "often",  "more",
                                "less", "again", "there", "here",    "to"};

const WordSet kAdverbs = {"also",  "then",  "still", "now",     "often",   "always",  "never", "already",
                          "just",  "only",  "even",  "usually", "further", "thus",    "therefore", "soon",
                          "again", "quickly", "rarely", "seldom", "sometimes", "not"};

const WordSet kAuxSingular = {"is", "was", "has", "does"};
const WordSet kAuxPlural = {"are", "were", "have", "do"};
const WordSet kAuxAny = {"am",  "had",   "did", "will",  "would", "can",  "could",  "shall", "should",
                         "may", "might", "must", "cannot", "won't", "can't", "isn't", "aren't", "wasn't",
                         "weren't", "doesn't", "don't", "didn't", "hasn't", "haven't"};

const WordSet kIrregularPast = {
    "fell",  "rose",   "grew",    "made",   "took",   "gave",  "went",   "came",   "saw",    "said",   "knew",
    "thought", "found", "became", "began",  "brought", "built", "bought", "kept",  "led",    "left",   "lost",
    "met",   "paid",   "ran",     "sold",   "sent",   "spent", "stood",  "told",   "understood", "won", "wrote",
    "held",  "felt",   "heard",   "meant",  "got",    "drew",  "chose",  "drove",  "spoke",  "broke",  "taught",
    "caught", "fought", "sought", "struck", "shook",  "swore", "threw",  "wore",   "forgot", "overcame", "undertook",
    "withdrew", "became", "arose", "ate",   "flew",   "froze", "hid",    "rode",   "rang",   "sang",   "sank",
    "shone", "slept",  "stole",   "swam",   "woke",   "bore",  "bent",   "bled",   "fed",    "fled",   "lent",
    "lit",   "sat",    "slid",    "spun",   "stuck",  "stung", "swept",  "swung",  "wept",   "wound"};

const WordSet kSubjectPronouns = {"i", "we", "you", "they", "he", "she", "it", "this", "that", "these", "those", "there"};

const WordSet kObjectPronouns = {"us", "me", "him", "them"};

// Verbs and adjectives that take a "that"-clause complement, with their
// common inflected forms.
const WordSet kComplementTakers = {
    "know",     "knows",     "knew",      "known",     "knowing",    "believe",    "believes",   "believed",
    "say",      "says",      "said",      "saying",    "think",      "thinks",     "thought",    "expect",
    "expects",  "expected",  "hope",      "hopes",     "hoped",      "ensure",     "ensures",    "ensured",
    "show",     "shows",     "showed",    "shown",     "understand", "understands", "understood", "feel",
    "feels",    "felt",      "find",      "finds",     "found",      "realize",    "realizes",   "realized",
    "realise",  "realised",  "recognize", "recognizes", "recognized", "note",      "notes",      "noted",
    "argue",    "argues",    "argued",    "claim",     "claims",     "claimed",    "suggest",    "suggests",
    "suggested", "indicate", "indicates", "indicated", "demonstrate", "demonstrates", "demonstrated", "report",
    "reports",  "reported",  "state",     "states",    "stated",     "announce",   "announces",  "announced",
    "agree",    "agrees",    "agreed",    "decide",    "decides",    "decided",    "assume",     "assumes",
    "assumed",  "confirm",   "confirms",  "confirmed", "learn",      "learns",     "learned",    "learnt",
    "mean",     "means",     "meant",     "prove",     "proves",     "proved",     "reveal",     "reveals",
    "revealed", "insist",    "insists",   "insisted",  "explain",    "explains",   "explained",  "promise",
    "promises", "promised",  "require",   "requires",  "required",   "believing",  "thinking",   "hoping",
    "ensuring", "showing",   "noting",    "stating",   "acknowledge", "acknowledges", "acknowledged", "emphasize",
    "emphasizes", "emphasized", "stress", "stresses",  "stressed",   "remember",   "remembers",  "remembered",
    "doubt",    "doubts",    "doubted",   "guarantee", "guarantees", "guaranteed", "predict",    "predicts",
    "predicted", "declare",  "declares",  "declared",  "admit",      "admits",     "admitted",   "wish",
    "proud",    "aware",     "sure",      "glad",      "happy",      "confident",  "convinced",  "certain",
    "afraid",   "pleased",   "delighted", "grateful",  "hopeful",    "sorry",      "concerned",  "clear",
    "evident",  "obvious",   "likely",    "possible",  "important",  "essential",  "necessary",  "true"};

// Predicative adjectives that make "It is X that" an extraposed
// complement rather than a cleft.
const WordSet kExtrapositionAdjectives = {
    "clear",    "important", "likely",  "unlikely", "true",     "possible", "impossible", "essential", "necessary",
    "evident",  "obvious",   "vital",   "crucial",  "certain",  "surprising", "natural",  "fortunate", "unfortunate",
    "critical", "known",     "said",    "believed", "expected", "apparent", "undeniable", "significant", "noteworthy"};

// Nouns whose "that"-clause is appositive.
const WordSet kAppositiveNouns = {"fact",     "idea",     "notion",   "view",      "belief",    "assumption", "hope",
                                  "possibility", "news",  "claim",    "evidence",  "conviction", "certainty", "realization",
                                  "sign",     "promise",  "message",  "principle", "expectation", "recognition"};

const WordSet kSubordinatorHeads = {"so", "such", "now", "given", "provided", "except", "assuming", "considering"};

const WordSet kCopulas = {"is", "was", "are", "were", "be", "been", "being"};

const WordSet kCoordinators = {"and", "or", "but"};

bool in(const WordSet& set, std::string_view w) { return set.find(w) != set.end(); }

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

bool is_function_word(std::string_view w) {
  return in(kDeterminers, w) || in(kPrepositions, w) || in(kOtherFunction, w);
}

bool is_aux(std::string_view w) { return in(kAuxSingular, w) || in(kAuxPlural, w) || in(kAuxAny, w); }

bool is_alpha_word(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](unsigned char c) {
    return (c >= 'a' && c <= 'z') || c == '-' || c == '\'' || c >= 0x80;
  });
}

bool is_adverb(std::string_view w) { return in(kAdverbs, w) || (w.size() > 4 && ends_with(w, "ly")); }

enum class Number { singular, plural, either };

// Plural by suffix; "-ss", "-us" and "-is" endings are read as singular.
bool looks_plural(std::string_view w) {
  return w.size() >= 3 && w.back() == 's' && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is");
}

Number noun_number(std::string_view w) { return looks_plural(w) ? Number::plural : Number::singular; }

Number pronoun_number(std::string_view w) {
  if (w == "i" || w == "we" || w == "you" || w == "they" || w == "these" || w == "those") return Number::plural;
  if (w == "there") return Number::either;
  return Number::singular;
}

// Could `w` head an NP (as opposed to closing it)?
bool np_word(const Token& t) {
  return t.word && !is_function_word(t.lower) && !is_aux(t.lower) && !in(kSubjectPronouns, t.lower) &&
         !in(kObjectPronouns, t.lower);
}

bool finite_verb(const Token& t, Number subject, bool allow_base) {
  if (!t.word) return false;
  const std::string_view w = t.lower;
  if (in(kAuxAny, w)) return true;
  if (in(kAuxSingular, w)) return subject != Number::plural;
  if (in(kAuxPlural, w)) return subject != Number::singular;
  if (is_function_word(w) || in(kSubjectPronouns, w) || in(kObjectPronouns, w) || !is_alpha_word(w)) return false;
  if (in(kIrregularPast, w)) return true;
  if (w.size() >= 4 && ends_with(w, "ed")) return true;
  if (subject != Number::plural && looks_plural(w)) return true;
  if (subject != Number::singular && allow_base && !is_adverb(w)) return true;
  return false;
}

struct Sentence {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive, boundary token not included
};

bool is_sentence_end(const Token& t) {
  return !t.word && (t.text == "." || t.text == "!" || t.text == "?" || t.text == "。");
}

std::vector<Sentence> sentences(const std::vector<Token>& tokens) {
  std::vector<Sentence> out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (is_sentence_end(tokens[i])) {
      if (i > begin) out.push_back({begin, i});
      begin = i + 1;
    }
  }
  if (begin < tokens.size()) out.push_back({begin, tokens.size()});
  return out;
}

// Verb position after `pos`, skipping one adverb.
std::optional<std::size_t> verb_after(const std::vector<Token>& tk, std::size_t pos, std::size_t end, Number subject,
                                      bool allow_base) {
  if (pos >= end) return std::nullopt;
  if (finite_verb(tk[pos], subject, allow_base)) return pos;
  if (tk[pos].word && is_adverb(tk[pos].lower) && pos + 1 < end && finite_verb(tk[pos + 1], subject, allow_base)) {
    return pos + 1;
  }
  return std::nullopt;
}

// Scans an NP whose first content word is at `first` for a finite verb
// within `max_words` further words.
bool np_then_verb(const std::vector<Token>& tk, std::size_t first, std::size_t end, std::size_t max_words) {
  for (std::size_t k = first; k < end && k < first + max_words; ++k) {
    if (!np_word(tk[k])) return false;
    if (k + 1 < end) {
      const Number num = noun_number(tk[k].lower);
      if (verb_after(tk, k + 1, end, num, num == Number::plural)) return true;
    }
  }
  return false;
}

// True when a subject followed by a finite verb starts at `j`. `permissive`
// admits any bare noun as subject.
bool clause_starts_at(const std::vector<Token>& tk, std::size_t j, std::size_t end, bool permissive) {
  if (j >= end || !tk[j].word) return false;
  const std::string& w = tk[j].lower;
  if (in(kSubjectPronouns, w)) {
    const Number num = pronoun_number(w);
    if (verb_after(tk, j + 1, end, num, num != Number::singular)) return true;
    if (w == "that" && clause_starts_at(tk, j + 1, end, permissive)) return true;
  }
  if (in(kDeterminers, w)) return np_then_verb(tk, j + 1, end, 4);
  if (!np_word(tk[j])) return false;
  const bool proper = tk[j].text.front() >= 'A' && tk[j].text.front() <= 'Z';
  if (proper || permissive || looks_plural(w)) return np_then_verb(tk, j, end, proper ? 3 : 2);
  return false;
}

std::string_view copula_of_cleft(const std::vector<Token>& tk, const Sentence& s) {
  if (s.end - s.begin < 3 || tk[s.begin].lower != "it") return {};
  const std::string& v = tk[s.begin + 1].lower;
  return v == "is" || v == "was" ? std::string_view(v) : std::string_view{};
}

struct Analysis {
  std::vector<Token> tokens;
  std::vector<AndDecision> ands;
  std::vector<ThatClassification> thats;
};

Analysis analyse(std::string_view text) {
  Analysis a;
  a.tokens = tokenize(text);
  const auto& tk = a.tokens;
  for (const auto& s : sentences(tk)) {
    std::size_t clause_begin = s.begin;
    std::optional<ThatLabel> earlier_that;
    bool seen_complementizer = false;
    for (std::size_t i = s.begin; i < s.end; ++i) {
      const Token& t = tk[i];
      if (!t.word) {
        if (t.text == ";" || t.text == ":") clause_begin = i + 1;
        continue;
      }
      if (t.lower == "and") {
        AndDecision d{t.offset, false, ""};
        const bool comma_before = i > s.begin && !tk[i - 1].word && tk[i - 1].text == ",";
        bool left = false;
        for (std::size_t p = clause_begin; p < i && !left; ++p) left = clause_starts_at(tk, p, i, true);
        if (!left) {
          d.rule = "no-clause-before";
        } else if (clause_starts_at(tk, i + 1, s.end, comma_before)) {
          d.clausal = true;
          d.rule = comma_before ? "comma-subject-verb" : "subject-verb";
        } else {
          d.rule = "no-subject-verb-after";
        }
        a.ands.push_back(std::move(d));
      } else if (t.lower == "that") {
        ThatClassification c{t.offset, ThatLabel::other, ""};
        const Token* prev = i > s.begin ? &tk[i - 1] : nullptr;
        const bool next_word = i + 1 < s.end && tk[i + 1].word;
        const std::string_view cleft_copula = copula_of_cleft(tk, s);
        const auto label = [&c](ThatLabel l, const char* rule) {
          c.label = l;
          c.rule = rule;
        };
        if (!next_word) {
          label(ThatLabel::demonstrative, "pronoun-before-punctuation");
        } else if (prev && prev->word && in(kSubordinatorHeads, prev->lower)) {
          label(ThatLabel::other, "subordinator");
        } else if (prev && prev->word && in(kPrepositions, prev->lower)) {
          label(ThatLabel::demonstrative, "after-preposition");
        } else if (!cleft_copula.empty() && !earlier_that && i >= s.begin + 3) {
          const bool extraposed = i == s.begin + 3 && in(kExtrapositionAdjectives, tk[s.begin + 2].lower);
          if (extraposed) {
            label(ThatLabel::complementizer, "extraposed-adjective");
          } else {
            label(ThatLabel::cleft, "it-copula-focus");
          }
        } else if (!prev) {
          label(ThatLabel::demonstrative, "sentence-initial");
        } else if (prev->word && in(kCoordinators, prev->lower)) {
          if (seen_complementizer) {
            label(ThatLabel::complementizer, "coordinated-complement");
          } else if (in(kSubjectPronouns, tk[i + 1].lower) && tk[i + 1].lower != "that") {
            label(ThatLabel::complementizer, "after-coordinator-pronoun");
          } else {
            label(ThatLabel::demonstrative, "after-coordinator");
          }
        } else if (prev->word && in(kComplementTakers, prev->lower) &&
                   !(i >= s.begin + 2 && in(kDeterminers, tk[i - 2].lower))) {
          label(ThatLabel::complementizer, "complement-taking-head");
        } else if (prev->word && in(kObjectPronouns, prev->lower)) {
          label(ThatLabel::complementizer, "after-object-pronoun");
        } else if (prev->word && in(kCopulas, prev->lower)) {
          label(ThatLabel::complementizer, "after-copula");
        } else if (prev->word && in(kAppositiveNouns, prev->lower) && clause_starts_at(tk, i + 1, s.end, false) &&
                   !finite_verb(tk[i + 1], Number::either, false)) {
          label(ThatLabel::complementizer, "appositive-noun");
        } else if (prev->word && np_word(*prev)) {
          label(ThatLabel::relative, "after-noun");
        } else {
          label(ThatLabel::other, "no-rule");
        }
        if (c.label == ThatLabel::complementizer) seen_complementizer = true;
        earlier_that = c.label;
        a.thats.push_back(std::move(c));
      }
    }
  }
  return a;
}

bool word_char(char32_t c) { return !text::is_whitespace(c) && !text::is_punctuation(c); }

bool ascii_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

}  // namespace

std::vector<Token> tokenize(std::string_view utf8) {
  const std::u32string s = text::decode_utf8(text::normalize_line_endings(utf8));
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char32_t c = s[i];
    if (text::is_whitespace(c)) {
      ++i;
      continue;
    }
    Token t;
    t.offset = i;
    std::size_t j = i;
    if (word_char(c)) {
      t.word = true;
      ++j;
      while (j < s.size()) {
        if (word_char(s[j])) {
          ++j;
          continue;
        }
        const bool joins = j + 1 < s.size() && word_char(s[j + 1]) && word_char(s[j - 1]);
        if (joins && (s[j] == U'\'' || s[j] == U'’' || s[j] == U'-')) {
          ++j;
          continue;
        }
        if (joins && (s[j] == U'.' || s[j] == U',') && ascii_digit(s[j - 1]) && ascii_digit(s[j + 1])) {
          ++j;
          continue;
        }
        break;
      }
    } else {
      ++j;
    }
    std::u32string piece = s.substr(i, j - i);
    for (auto& ch : piece) {
      if (ch == U'’') ch = U'\'';
    }
    t.text = text::encode_utf8(s.substr(i, j - i));
    t.lower = text::to_lower_ascii(text::encode_utf8(piece));
    out.push_back(std::move(t));
    i = j;
  }
  return out;
}

std::string_view to_string(ThatLabel label) {
  switch (label) {
    case ThatLabel::relative: return "relative";
    case ThatLabel::complementizer: return "complementizer";
    case ThatLabel::demonstrative: return "demonstrative";
    case ThatLabel::cleft: return "cleft";
    case ThatLabel::other: return "other";
  }
  return "other";
}

ThatLabel parse_that_label(std::string_view s) {
  for (const auto l : {ThatLabel::relative, ThatLabel::complementizer, ThatLabel::demonstrative, ThatLabel::cleft,
                       ThatLabel::other}) {
    if (to_string(l) == s) return l;
  }
  throw Error(Errc::parse, "unknown that-label '" + std::string(s) + "'");
}

std::vector<AndDecision> classify_and_tokens(std::string_view text) { return analyse(text).ands; }

std::size_t count_clausal_and(std::string_view text) {
  const auto ands = classify_and_tokens(text);
  return static_cast<std::size_t>(std::count_if(ands.begin(), ands.end(), [](const AndDecision& d) { return d.clausal; }));
}

std::vector<ThatClassification> classify_that_tokens(std::string_view text) { return analyse(text).thats; }

Centi normalize_per_1000(std::size_t count, std::size_t word_count) {
  if (word_count == 0) throw Error(Errc::invalid_argument, "word count is zero");
  // hundredths = floor(100000·count/words + 1/2)
  const auto c = static_cast<std::int64_t>(count);
  const auto w = static_cast<std::int64_t>(word_count);
  return Centi::from_units((200000 * c + w) / (2 * w));
}

SyntaxProfileResult syntax_profile(std::string_view text) {
  SyntaxProfileResult res;
  res.word_count = text::word_count(text);
  const Analysis a = analyse(text);
  std::size_t and_i = 0;
  std::size_t that_i = 0;
  for (const auto& t : a.tokens) {
    if (!t.word) continue;
    if (t.lower == "and") {
      const auto& d = a.ands[and_i++];
      if (d.clausal) ++res.clausal_and_count;
      res.trace.push_back({t.offset, t.text, d.clausal, "and:" + d.rule});
    } else if (t.lower == "that") {
      const auto& c = a.thats[that_i++];
      const bool rel = c.label == ThatLabel::relative;
      if (rel) ++res.relative_pronoun_count;
      res.trace.push_back({t.offset, t.text, rel, "that:" + std::string(to_string(c.label)) + ":" + c.rule});
    } else if (t.lower == "which" || t.lower == "who") {
      ++res.relative_pronoun_count;
      res.trace.push_back({t.offset, t.text, true, "relative-pronoun"});
    }
  }
  if (res.word_count > 0) {
    res.and_per_1000w = normalize_per_1000(res.clausal_and_count, res.word_count);
    res.relp_per_1000w = normalize_per_1000(res.relative_pronoun_count, res.word_count);
  }
  return res;
}

}  // namespace specmt::syntax
