#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

// Lexical helpers over Lean 4 source. Only as much of the grammar as the
// pipeline needs: comments, string literals, brackets and identifiers.
namespace cpl::lean {

enum class ByteKind : std::uint8_t { code, comment, string };

/// Classifies every byte of `src`. Handles nested `/- -/` block comments,
/// `--` line comments and `"..."` literals with backslash escapes.
std::vector<ByteKind> classify(std::string_view src);

/// True for bytes that may continue an identifier (ASCII alnum, `_`, `'`,
/// `.`, `!`, `?` and any non-ASCII byte).
bool is_ident_byte(char c);

/// True if `word` occurs as a whole identifier token in code (not inside a
/// comment or string).
bool contains_identifier(std::string_view src, std::string_view word);

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

/// Position of the first `:=` in [from, to) at bracket depth zero, in code.
std::size_t find_top_level_assign(std::string_view src, const std::vector<ByteKind>& kinds,
                                  std::size_t from, std::size_t to);

/// If an opening bracket starts at `pos`, returns its byte length, else 0.
std::size_t opening_bracket_at(std::string_view src, std::size_t pos);
std::size_t closing_bracket_at(std::string_view src, std::size_t pos);

/// Skips one balanced bracket group starting at `pos` (which must be an
/// opening bracket). Returns the position after the matching close, or
/// npos if unbalanced before `to`.
std::size_t skip_group(std::string_view src, const std::vector<ByteKind>& kinds, std::size_t pos,
                       std::size_t to);

}  // namespace cpl::lean
