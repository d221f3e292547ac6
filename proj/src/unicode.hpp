#pragma once

#include <string>
#include <string_view>

// Minimal UTF-8 and character-class helpers. Coverage targets Latin scripts
// (ASCII, Latin-1 Supplement, Latin Extended-A), which is what Spanish
// clinical text needs; other code points are classified conservatively.
namespace deid::unicode {

// Invalid sequences decode to U+FFFD, one per offending byte.
std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view text);
std::string encode(char32_t cp);

bool is_space(char32_t c);
bool is_digit(char32_t c);
bool is_letter(char32_t c);
bool is_upper(char32_t c);
bool is_lower(char32_t c);
bool is_alnum(char32_t c);
// Anything printable that is neither a letter, a digit nor whitespace.
bool is_punct(char32_t c);

char32_t to_lower(char32_t c);
char32_t to_upper(char32_t c);
std::u32string to_lower(std::u32string_view s);
// Case-folds and re-encodes; accents are kept.
std::string fold(std::string_view utf8);

// Number of code points in a UTF-8 string.
std::size_t length(std::string_view utf8);

}  // namespace deid::unicode
