#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "specmt/fixed_point.hpp"

namespace specmt::syntax {

struct Token {
  std::string text;   // original spelling
  std::string lower;  // ASCII-lowercased
  std::size_t offset = 0;  // code points from the start of the text
  bool word = false;       // false for punctuation
};

/// Words keep inner apostrophes, hyphens and decimal points; every other
/// punctuation mark is its own token. Whitespace, including line breaks, only
/// separates tokens.
std::vector<Token> tokenize(std::string_view text);

enum class ThatLabel { relative, complementizer, demonstrative, cleft, other };

std::string_view to_string(ThatLabel label);
ThatLabel parse_that_label(std::string_view s);

struct ThatClassification {
  std::size_t offset = 0;
  ThatLabel label = ThatLabel::other;
  std::string rule;
};

struct AndDecision {
  std::size_t offset = 0;
  bool clausal = false;
  std::string rule;
};

std::vector<AndDecision> classify_and_tokens(std::string_view text);
std::size_t count_clausal_and(std::string_view text);
std::vector<ThatClassification> classify_that_tokens(std::string_view text);

struct TraceEntry {
  std::size_t offset = 0;
  std::string token;
  bool counted = false;
  std::string rule;
};

struct SyntaxProfileResult {
  std::size_t word_count = 0;
  std::size_t clausal_and_count = 0;
  std::size_t relative_pronoun_count = 0;
  Centi and_per_1000w;
  Centi relp_per_1000w;
  std::vector<TraceEntry> trace;  // every and/which/who/that token, in text order
};

/// Relative pronouns are every "which" and "who" plus "that" labeled relative.
SyntaxProfileResult syntax_profile(std::string_view text);

/// Round-half-up of 1000·count/word_count to two decimals, exact in integer
/// arithmetic. Throws Error(Errc::invalid_argument) when word_count is 0.
Centi normalize_per_1000(std::size_t count, std::size_t word_count);

}  // namespace specmt::syntax
