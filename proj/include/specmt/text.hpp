#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace specmt::text {

/// Byte offset of the first malformed UTF-8 sequence, if any. Overlong
/// encodings, surrogates and code points above U+10FFFF are rejected.
std::optional<std::size_t> first_invalid_utf8(std::string_view s);
inline bool is_valid_utf8(std::string_view s) { return !first_invalid_utf8(s); }

/// Decodes valid UTF-8; throws Error(Errc::encoding) otherwise.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

/// CRLF and lone CR become LF; a leading byte-order mark is dropped.
std::string normalize_line_endings(std::string_view s);

bool is_whitespace(char32_t c);
bool is_punctuation(char32_t c);

/// Number of Unicode code points.
std::size_t char_count(std::string_view utf8);

/// True when the text holds nothing but Unicode whitespace.
bool is_blank(std::string_view utf8);

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
std::vector<std::string> split(std::string_view s, char delim);

/// Word-count rule used across the corpus and the syntax profiler: split on
/// Unicode whitespace, strip leading/trailing punctuation from each token,
/// drop tokens that become empty.
std::size_t word_count(std::string_view utf8);

/// Lowercase, collapse internal whitespace runs to one space, trim.
std::string normalize_note(std::string_view s);

}  // namespace specmt::text
