#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tbparse::unicode {

/// Decodes UTF-8 into code points. Invalid bytes decode to U+FFFD one byte at a time.
std::u32string decode(std::string_view utf8);
/// As decode(); offsets receives the byte offset of every code point plus utf8.size().
std::u32string decode(std::string_view utf8, std::vector<std::size_t>* offsets);

std::string encode(std::u32string_view cps);
std::string encode(char32_t cp);

/// Splits a UTF-8 string into its code points, each re-encoded as a string.
std::vector<std::string> code_points(std::string_view utf8);

/// Simple (one-to-one) Unicode lowercase mapping.
char32_t to_lower(char32_t cp);
std::string to_lower(std::string_view utf8);

bool is_space(char32_t cp);

}  // namespace tbparse::unicode
