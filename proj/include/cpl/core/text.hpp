#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cpl::text {

bool is_space(char c);

std::string_view trim(std::string_view s);
std::string_view trim_right(std::string_view s);

/// Collapses every run of ASCII whitespace to one space and trims the ends.
std::string collapse_whitespace(std::string_view s);

/// Number of Unicode code points in a UTF-8 string.
std::size_t utf8_length(std::string_view s);

/// Splits on '\n'; each element keeps its terminating newline if it had one.
std::vector<std::string_view> split_lines_keep(std::string_view s);

bool starts_with_at(std::string_view s, std::size_t pos, std::string_view prefix);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view s);

}  // namespace cpl::text
