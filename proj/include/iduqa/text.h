#pragma once

// Small ASCII text helpers shared by the matcher, cleaner, and metrics.
// Clinical note text in this pipeline is treated as ASCII; case folding and
// word boundaries are byte-level on purpose.

#include <string>
#include <string_view>
#include <vector>

namespace iduqa {

inline bool is_space_char(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline bool is_word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

inline bool is_ascii_punct(char c) {
    return c >= '!' && c <= '~' && !is_word_char(c);
}

std::string to_lower(std::string_view text);

std::string_view trim_view(std::string_view text);

inline std::string trim(std::string_view text) { return std::string(trim_view(text)); }

/// Collapses every whitespace run to a single space and trims the ends.
std::string collapse_whitespace(std::string_view text);

/// Maximal non-whitespace runs, in order.
std::vector<std::string_view> split_words(std::string_view text);

std::size_t word_count(std::string_view text);

} // namespace iduqa
