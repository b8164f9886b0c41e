#include "cpl/core/lean_source.hpp"

#include <array>
#include <cctype>
#include <string_view>

namespace cpl::lean {
namespace {

constexpr std::array<std::string_view, 5> kOpen{"(", "[", "{", "⦃", "⟨"};
constexpr std::array<std::string_view, 5> kClose{")", "]", "}", "⦄", "⟩"};

std::size_t match_any(std::string_view src, std::size_t pos,
                      const std::array<std::string_view, 5>& set) {
  for (auto tok : set) {
    if (src.substr(pos).starts_with(tok)) return tok.size();
  }
  return 0;
}

}  // namespace

std::vector<ByteKind> classify(std::string_view src) {
  std::vector<ByteKind> kinds(src.size(), ByteKind::code);
  std::size_t i = 0;
  int block_depth = 0;
  while (i < src.size()) {
    if (block_depth > 0) {
      if (src.substr(i).starts_with("/-")) {
        ++block_depth;
        kinds[i] = kinds[i + 1] = ByteKind::comment;
        i += 2;
      } else if (src.substr(i).starts_with("-/")) {
        --block_depth;
        kinds[i] = kinds[i + 1] = ByteKind::comment;
        i += 2;
      } else {
        kinds[i++] = ByteKind::comment;
      }
      continue;
    }
    if (src.substr(i).starts_with("--")) {
      while (i < src.size() && src[i] != '\n') kinds[i++] = ByteKind::comment;
      continue;
    }
    if (src.substr(i).starts_with("/-")) {
      block_depth = 1;
      kinds[i] = kinds[i + 1] = ByteKind::comment;
      i += 2;
      continue;
    }
    if (src[i] == '"') {
      kinds[i++] = ByteKind::string;
      while (i < src.size()) {
        char c = src[i];
        kinds[i++] = ByteKind::string;
        if (c == '\\' && i < src.size()) {
          kinds[i++] = ByteKind::string;
        } else if (c == '"') {
          break;
        }
      }
      continue;
    }
    ++i;
  }
  return kinds;
}

bool is_ident_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) || c == '_' || c == '\'' || c == '.' || c == '!' ||
         c == '?';
}

bool contains_identifier(std::string_view src, std::string_view word) {
  auto kinds = classify(src);
  std::size_t pos = 0;
  while ((pos = src.find(word, pos)) != std::string_view::npos) {
    std::size_t end = pos + word.size();
    bool in_code = true;
    for (std::size_t k = pos; k < end; ++k) in_code = in_code && kinds[k] == ByteKind::code;
    bool left_ok = pos == 0 || !is_ident_byte(src[pos - 1]);
    bool right_ok = end == src.size() || !is_ident_byte(src[end]);
    // `h.sorry` style projections are still identifiers containing the word,
    // but `.` is an identifier byte so they are excluded by left_ok.
    if (in_code && left_ok && right_ok) return true;
    pos = end;
  }
  return false;
}

std::size_t opening_bracket_at(std::string_view src, std::size_t pos) {
  return match_any(src, pos, kOpen);
}

std::size_t closing_bracket_at(std::string_view src, std::size_t pos) {
  return match_any(src, pos, kClose);
}

std::size_t find_top_level_assign(std::string_view src, const std::vector<ByteKind>& kinds,
                                  std::size_t from, std::size_t to) {
  int depth = 0;
  std::size_t i = from;
  while (i < to) {
    if (kinds[i] != ByteKind::code) {
      ++i;
      continue;
    }
    if (auto n = opening_bracket_at(src, i)) {
      ++depth;
      i += n;
      continue;
    }
    if (auto n = closing_bracket_at(src, i)) {
      if (depth > 0) --depth;
      i += n;
      continue;
    }
    if (depth == 0 && i + 1 < to && src[i] == ':' && src[i + 1] == '=' &&
        kinds[i + 1] == ByteKind::code) {
      return i;
    }
    ++i;
  }
  return npos;
}

std::size_t skip_group(std::string_view src, const std::vector<ByteKind>& kinds, std::size_t pos,
                       std::size_t to) {
  int depth = 0;
  std::size_t i = pos;
  while (i < to) {
    if (kinds[i] != ByteKind::code) {
      ++i;
      continue;
    }
    if (auto n = opening_bracket_at(src, i)) {
      ++depth;
      i += n;
      continue;
    }
    if (auto n = closing_bracket_at(src, i)) {
      --depth;
      i += n;
      if (depth == 0) return i;
      continue;
    }
    ++i;
  }
  return npos;
}

}  // namespace cpl::lean
