#pragma once

// Published figures used as fixtures. Values are copied as printed,
// including their rounding.

#include <array>
#include <cstddef>
#include <string_view>

namespace specmt::oracle {

// Method-level weighted error means, one row per evaluator, in the order
// official, google, gpt_basic, gpt_spec, gpt_pe_spec.
inline constexpr std::array<double, 5> kEvaluatorOneMeans = {2.60, 1.82, 1.04, 0.70, 0.38};
inline constexpr std::array<double, 5> kEvaluatorTwoMeans = {3.01, 2.29, 1.28, 1.29, 1.03};

struct RankTestRow {
  std::string_view a;
  std::string_view b;
  double w;
  double z;
  double p;
  bool p_is_upper_bound;  // printed as "p < p"
  double r;
};

inline constexpr std::size_t kRankTestN = 594;

inline constexpr std::array<RankTestRow, 10> kRankTestRows = {{
    {"official", "google", 88018, 0.081, 0.9341, false, 0.003},
    {"official", "gpt_basic", 74913, 3.213, 0.00113, false, 0.132},
    {"official", "gpt_spec", 63954, 5.832, 0.00001, true, 0.239},
    {"official", "gpt_pe_spec", 59011, 7.013, 0.00001, true, 0.288},
    {"google", "gpt_basic", 73843, 3.469, 0.00043, false, 0.142},
    {"google", "gpt_spec", 62409, 6.201, 0.00001, true, 0.254},
    {"google", "gpt_pe_spec", 57082.5, 7.474, 0.00001, true, 0.307},
    {"gpt_basic", "gpt_spec", 75367, 3.104, 0.00162, false, 0.127},
    {"gpt_basic", "gpt_pe_spec", 68326.5, 4.787, 0.00001, true, 0.196},
    {"gpt_spec", "gpt_pe_spec", 81396.5, 1.664, 0.0903, false, 0.068},
}};

struct SyntaxCountRow {
  std::string_view method;
  std::size_t words;
  std::size_t clausal_and;
  std::size_t relative_pronouns;
  std::string_view and_per_1000w;
  std::string_view relp_per_1000w;
};

inline constexpr std::array<SyntaxCountRow, 5> kSyntaxCountRows = {{
    {"official", 8776, 58, 72, "6.61", "8.20"},
    {"google", 8894, 66, 83, "7.42", "9.34"},
    {"gpt_basic", 8655, 54, 61, "6.24", "7.05"},
    {"gpt_spec", 8351, 53, 59, "6.35", "7.07"},
    {"gpt_pe_spec", 8216, 57, 61, "6.94", "7.42"},
}};

// The one printed frequency that does not follow from its own raw counts.
inline constexpr std::size_t kMisprintedCount = 83;
inline constexpr std::size_t kMisprintedWords = 8894;
inline constexpr std::string_view kMisprintedValue = "9.34";
inline constexpr std::string_view kRecomputedValue = "9.33";

inline constexpr std::string_view kPromptBasic = "Please translate the following Japanese text into English.";
inline constexpr std::string_view kPromptSpec =
    "The following Japanese text is an excerpt from the integrated report of [company name], a key part of the "
    "company's investor relations materials. Please translate this text into English in a way that will be "
    "appealing to international investors. The purpose of this translation is to enhance the company's appeal to a "
    "wider audience of investors. Please do not add any additional information.";
inline constexpr std::string_view kPromptPostEdit =
    "The following text is a translation of an excerpt from the integrated report of [company name], a key part of "
    "the company's investor relations materials. The purpose of this translation is to enhance the company's appeal "
    "to a wider audience of investors. The initial translation was done using Google Translate. Please refine this "
    "translation to make it more engaging and appealing in English. Please do not add any additional information.";

}  // namespace specmt::oracle
