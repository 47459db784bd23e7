#pragma once

// Thin UTF-8 helpers over ICU. Invalid byte sequences decode to U+FFFD.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace termbt::unicode {

std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view codepoints);
void append(std::string& out, char32_t cp);

std::string to_lower(std::string_view utf8);  // full case mapping, root locale
std::string to_nfc(std::string_view utf8);

bool is_space(char32_t cp);
bool is_punct(char32_t cp);
// Punctuation that may be trimmed from token and term edges. '%' and '#'
// are kept because they carry meaning ("3.57%", "C#").
bool is_edge_punct(char32_t cp);
bool is_alnum(char32_t cp);
bool is_alpha(char32_t cp);
bool is_upper(char32_t cp);
char32_t simple_lower(char32_t cp);
char32_t simple_upper(char32_t cp);

std::size_t codepoint_count(std::string_view utf8);

/// Byte offset of every codepoint start, plus a final entry equal to utf8.size().
std::vector<std::size_t> codepoint_offsets(std::string_view utf8);

/// Word segments per the Unicode word-break rules, skipping spaces and punctuation.
std::vector<std::string> words(std::string_view utf8);

}  // namespace termbt::unicode
