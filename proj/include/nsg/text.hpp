#pragma once

// Rule-based UTF-8 text helpers. No locale or external model is consulted, so
// every result is a pure function of the input bytes.

#include <string>
#include <string_view>

namespace nsg::text {

/// Decodes UTF-8. Malformed sequences decode to U+FFFD one byte at a time.
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view code_points);

/// Simple case folding for ASCII, Latin-1, Latin Extended-A, Greek, Cyrillic
/// and fullwidth Latin. Idempotent.
char32_t to_lower(char32_t c);
std::string to_lower(std::string_view s);

bool is_space(char32_t c);
bool is_punct(char32_t c);
bool is_sentence_terminator(char32_t c);

/// Strips Unicode whitespace from both ends.
std::string trim(std::string_view s);

/// Lowercases, trims and collapses internal whitespace runs to one space.
std::string normalize_label(std::string_view s);

/// Fixed English stopword list shipped with the library.
bool is_stopword(std::string_view lowercase_token);

}  // namespace nsg::text
