#ifndef PROCGRAPH_TEXT_HPP
#define PROCGRAPH_TEXT_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Small text toolkit: UTF-8 codec, case folding and composition for the
// Latin + Cyrillic repertoire this dataset uses, IRI slugs, and the
// dot-separated denar rendering.
namespace procgraph {

std::string trim(std::string_view s);
bool is_blank(std::string_view s);
std::string to_lower_ascii(std::string_view s);

// Decodes UTF-8; invalid sequences raise Errc::csv_syntax-free io error.
std::vector<char32_t> utf8_decode(std::string_view s);
void utf8_append(std::string& out, char32_t cp);
std::string utf8_encode(const std::vector<char32_t>& cps);
std::size_t utf8_length(std::string_view s);

char32_t lower_codepoint(char32_t cp);
bool is_letter_codepoint(char32_t cp);
bool is_digit_codepoint(char32_t cp);

// Lowercases the full string, codepoint-wise.
std::string lower_utf8(std::string_view s);

// Canonical composition for combining marks over the Latin-1 / Macedonian
// Cyrillic repertoire (enough to make slugs stable for this corpus).
std::vector<char32_t> compose_nfc(std::vector<char32_t> cps);

// NFC + lowercase + whitespace runs to single '-' + strip everything that is
// not a letter, digit or hyphen. Returns an empty string when nothing
// survives; callers decide whether that is an error.
std::string slugify(std::string_view label);

// Windows-1251 to UTF-8 (Cyrillic legacy exports).
std::string cp1251_to_utf8(std::string_view bytes);

// 241083174450 -> "241.083.174.450"
std::string format_amount(long long denars);

// Shortest round-trip rendering of a double ("3" stays "3").
std::string format_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace procgraph

#endif  // PROCGRAPH_TEXT_HPP
