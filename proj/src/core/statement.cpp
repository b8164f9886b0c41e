#include "cpl/core/statement.hpp"

#include "cpl/core/lean_source.hpp"
#include "cpl/core/text.hpp"
#include "cpl/error.hpp"

namespace cpl {

namespace {

constexpr std::string_view kTheorem = "theorem";

bool only_indent_before(std::string_view src, std::size_t pos) {
  while (pos > 0) {
    char c = src[pos - 1];
    if (c == '\n') return true;
    if (c != ' ' && c != '\t') return false;
    --pos;
  }
  return true;
}

std::vector<std::size_t> declaration_starts(std::string_view src,
                                            const std::vector<lean::ByteKind>& kinds) {
  std::vector<std::size_t> starts;
  std::size_t pos = 0;
  while ((pos = src.find(kTheorem, pos)) != std::string_view::npos) {
    std::size_t end = pos + kTheorem.size();
    if (kinds[pos] == lean::ByteKind::code && only_indent_before(src, pos) && end < src.size() &&
        text::is_space(src[end])) {
      starts.push_back(pos);
    }
    pos = end;
  }
  return starts;
}

std::size_t skip_blank(std::string_view src, const std::vector<lean::ByteKind>& kinds,
                       std::size_t p, std::size_t limit) {
  while (p < limit && (text::is_space(src[p]) || kinds[p] == lean::ByteKind::comment)) ++p;
  return p;
}

struct Header {
  std::size_t name_begin = 0;
  std::size_t name_end = 0;
  std::size_t colon = 0;
  std::size_t assign = lean::npos;
  bool has_binders = false;
};

std::optional<Header> scan_header(std::string_view src, const std::vector<lean::ByteKind>& kinds,
                                  std::size_t start, std::size_t limit) {
  Header h;
  std::size_t p = skip_blank(src, kinds, start + kTheorem.size(), limit);
  h.name_begin = p;
  while (p < limit && !text::is_space(src[p]) && src[p] != ':' &&
         lean::opening_bracket_at(src, p) == 0) {
    ++p;
  }
  h.name_end = p;
  if (h.name_end == h.name_begin) return std::nullopt;
  p = skip_blank(src, kinds, p, limit);
  while (p < limit && lean::opening_bracket_at(src, p) != 0) {
    p = lean::skip_group(src, kinds, p, limit);
    if (p == lean::npos) return std::nullopt;
    h.has_binders = true;
    p = skip_blank(src, kinds, p, limit);
  }
  if (p >= limit || src[p] != ':' || (p + 1 < limit && src[p + 1] == '=')) return std::nullopt;
  h.colon = p;
  h.assign = lean::find_top_level_assign(src, kinds, p + 1, limit);
  return h;
}

}  // namespace

struct DeclarationScanner {
  static TheoremStatement make(std::string_view src, std::size_t start, const Header& h) {
    std::string name(src.substr(h.name_begin, h.name_end - h.name_begin));
    std::size_t body_begin = h.has_binders ? h.name_end : h.colon + 1;
    std::string body(text::trim(src.substr(body_begin, h.assign - body_begin)));
    std::string head(src.substr(start, h.assign + 2 - start));
    return TheoremStatement(std::move(name), std::move(body), std::move(head), h.has_binders);
  }
};

TheoremStatement::TheoremStatement(std::string name, std::string body, std::string head,
                                   bool has_binders)
    : name_(std::move(name)),
      body_(std::move(body)),
      head_(std::move(head)),
      source_text_(head_ + " sorry"),
      has_binders_(has_binders) {
  if (name_.empty()) throw InvariantError("theorem name is empty");
  if (body_.empty()) throw InvariantError("theorem '" + name_ + "' has an empty statement");
}

TheoremStatement TheoremStatement::parse(std::string_view declaration) {
  auto result = parse_theorem_declarations(declaration);
  if (result.statements.size() != 1 || !result.skipped.empty()) {
    throw InvariantError("expected exactly one `theorem ... := sorry` declaration in: " +
                         std::string(text::trim(declaration)));
  }
  return result.statements.front();
}

TheoremStatement TheoremStatement::from_type(std::string name, std::string type) {
  return parse("theorem " + name + " : " + type + " := sorry");
}

TheoremStatement TheoremStatement::renamed(const std::string& new_name) const {
  auto name_pos = head_.find(name_, kTheorem.size());
  std::string head = "theorem " + new_name + head_.substr(name_pos + name_.size());
  return TheoremStatement(new_name, body_, std::move(head), has_binders_);
}

std::string TheoremStatement::with_proof(std::string_view proof) const {
  return head_ + " " + std::string(proof);
}

std::string TheoremStatement::as_example(std::string_view proof) const {
  auto name_pos = head_.find(name_, kTheorem.size());
  return "example" + head_.substr(name_pos + name_.size()) + " " + std::string(proof);
}

ProofScript::ProofScript(std::string_view text) : text_(text::trim(text)) {
  if (auto why = violation(text_)) throw InvariantError(*why);
}

std::optional<std::string> ProofScript::violation(std::string_view text) {
  if (text::trim(text).empty()) return "empty proof";
  if (lean::contains_identifier(text, "sorry")) return "proof uses `sorry`";
  return std::nullopt;
}

StrippedText strip_code_fences(std::string_view input) {
  StrippedText out;
  out.text.reserve(input.size());
  bool open = false;
  for (auto line : text::split_lines_keep(input)) {
    auto content = text::trim(line);
    bool fence = content.starts_with("```") || content.starts_with("~~~");
    if (!fence) {
      out.text.append(line);
      continue;
    }
    bool tagged = text::trim(content.substr(3)).size() > 0;
    if (open && tagged) {
      out.warnings.push_back("malformed fence nesting: tagged fence inside an open block");
      continue;  // treat as a nested opener, keep the block open
    }
    open = !open;
  }
  if (open) out.warnings.push_back("unterminated code fence");
  return out;
}

ParseResult parse_theorem_declarations(std::string_view raw) {
  ParseResult result;
  auto stripped = strip_code_fences(raw);
  result.warnings = std::move(stripped.warnings);
  std::string_view src = stripped.text;
  auto kinds = lean::classify(src);
  auto starts = declaration_starts(src, kinds);
  for (std::size_t k = 0; k < starts.size(); ++k) {
    std::size_t start = starts[k];
    std::size_t limit = k + 1 < starts.size() ? starts[k + 1] : src.size();
    std::string region(text::trim(src.substr(start, limit - start)));
    auto header = scan_header(src, kinds, start, limit);
    if (!header) {
      result.warnings.push_back("ignored non-declaration line: " + region.substr(0, 60));
      continue;
    }
    if (header->assign == lean::npos) {
      result.skipped.push_back({region, "declaration has no `:=`"});
      continue;
    }
    std::size_t p = skip_blank(src, kinds, header->assign + 2, limit);
    constexpr std::string_view kSorry = "sorry";
    bool is_sorry = text::starts_with_at(src, p, kSorry) &&
                    (p + kSorry.size() >= limit || !lean::is_ident_byte(src[p + kSorry.size()]));
    if (!is_sorry) {
      result.skipped.push_back({region, "declaration does not end with `:= sorry`"});
      continue;
    }
    try {
      result.statements.push_back(DeclarationScanner::make(src, start, *header));
    } catch (const InvariantError& e) {
      result.skipped.push_back({region, e.what()});
    }
  }
  return result;
}

std::vector<ProvedDeclaration> scan_declarations(std::string_view src) {
  std::vector<ProvedDeclaration> out;
  auto kinds = lean::classify(src);
  auto starts = declaration_starts(src, kinds);
  for (std::size_t k = 0; k < starts.size(); ++k) {
    std::size_t limit = k + 1 < starts.size() ? starts[k + 1] : src.size();
    auto header = scan_header(src, kinds, starts[k], limit);
    if (!header || header->assign == lean::npos) continue;
    try {
      auto stmt = DeclarationScanner::make(src, starts[k], *header);
      std::string proof(text::trim(src.substr(header->assign + 2, limit - header->assign - 2)));
      out.push_back({std::move(stmt), std::move(proof)});
    } catch (const InvariantError&) {
    }
  }
  return out;
}

std::optional<ProvedDeclaration> parse_proved_declaration(std::string_view text) {
  auto all = scan_declarations(text);
  if (all.empty()) return std::nullopt;
  return all.front();
}

std::string normalize_statement(const TheoremStatement& stmt) {
  return text::collapse_whitespace(stmt.body());
}

}  // namespace cpl
