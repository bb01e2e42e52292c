#pragma once

#include <string>
#include <string_view>
#include <vector>

// Minimal UTF-8 helpers. Character classes cover ASCII, Latin-1 Supplement
// and Latin Extended-A, which is what Portuguese and English titles use.
// Nothing here depends on the process locale.
namespace newsclick::text {

/// Decodes UTF-8; invalid bytes decode to U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

bool is_space(char32_t c);
bool is_upper(char32_t c);
bool is_letter(char32_t c);
bool is_alnum(char32_t c);
char32_t to_lower(char32_t c);

/// Splits on whitespace; returns code-point tokens.
std::vector<std::u32string> split_whitespace(std::u32string_view s);

/// Lowercased maximal runs of letters and digits.
std::vector<std::u32string> word_tokens(std::u32string_view s);

std::string trim(std::string_view s);

/// Escapes backslash, tab, newline and carriage return as \\, \t, \n, \r.
std::string escape_field(std::string_view s);
/// Inverse of escape_field; throws ParseError on a dangling or unknown escape.
std::string unescape_field(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace newsclick::text
