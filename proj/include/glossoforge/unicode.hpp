#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace glossoforge::unicode {

// Lowercases with root-locale rules and recomposes to NFC.
std::string lower(std::string_view utf8);

// Lowercase, then fold each code point to its base letters (canonical
// decomposition with combining marks removed). Code points without a fold
// pass through unchanged.
std::string fold(std::string_view utf8);

// Splits a UTF-8 string into its code points, each as a UTF-8 substring.
// Throws InputError on malformed UTF-8.
std::vector<std::string> code_points(std::string_view utf8);

bool is_ascii_lower_alpha(std::string_view s);

// Splits on ASCII/Unicode whitespace; empty pieces are dropped.
std::vector<std::string> split_whitespace(std::string_view text);

// Removes leading and trailing punctuation/symbol code points.
std::string strip_edge_punctuation(std::string_view token);

}  // namespace glossoforge::unicode
