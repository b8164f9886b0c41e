#include "cpl/core/library.hpp"

#include <fstream>
#include <sstream>

#include "cpl/core/text.hpp"
#include "cpl/error.hpp"

namespace cpl {

namespace {
constexpr std::string_view kMarkerPrefix = "-- [cpl:entry ";
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::cpl:
      return "cpl";
    case Provenance::simple_loop:
      return "simple_loop";
    case Provenance::fixture:
      return "fixture";
  }
  return "cpl";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "cpl") return Provenance::cpl;
  if (s == "simple_loop") return Provenance::simple_loop;
  if (s == "fixture") return Provenance::fixture;
  throw ConsistencyError("unknown provenance '" + std::string(s) + "'");
}

bool Library::contains_name(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.statement.name() == name) return true;
  }
  return false;
}

const LibraryEntry& Library::append(const TheoremStatement& statement, ProofScript proof,
                                    Provenance provenance, std::string created_at) {
  std::size_t index = entries_.size();
  TheoremStatement stored = statement;
  if (contains_name(statement.name())) {
    stored = statement.renamed(statement.name() + "_" + std::to_string(index));
  }
  entries_.push_back({std::move(stored), std::move(proof), index, provenance, std::move(created_at)});
  return entries_.back();
}

Library Library::prefix(std::size_t n) const {
  Library out(seed_source_);
  out.entries_.assign(entries_.begin(), entries_.begin() + std::min(n, entries_.size()));
  return out;
}

std::string entry_marker(const LibraryEntry& entry) {
  return std::string(kMarkerPrefix) + std::to_string(entry.sequence_index) + " " +
         to_string(entry.provenance) + " " + entry.created_at + "]";
}

std::string join_declarations(std::string_view seed, std::span<const std::string> declarations) {
  std::string out(seed);
  if (declarations.empty()) return out;
  if (!out.empty() && out.back() != '\n') out.push_back('\n');
  for (const auto& d : declarations) {
    out.push_back('\n');
    out.append(d);
    out.push_back('\n');
  }
  return out;
}

std::string render_library_file(const Library& library) {
  std::vector<std::string> blocks;
  blocks.reserve(library.size());
  for (const auto& e : library.entries()) blocks.push_back(entry_marker(e) + "\n" + e.declaration());
  return join_declarations(library.seed_source(), blocks);
}

Library parse_library_file(std::string_view file) {
  std::vector<std::size_t> markers;
  for (std::size_t pos = 0; (pos = file.find(kMarkerPrefix, pos)) != std::string_view::npos;
       pos += kMarkerPrefix.size()) {
    if (pos == 0 || file[pos - 1] == '\n') markers.push_back(pos);
  }
  if (markers.empty()) return Library(std::string(file));

  std::string_view seed = file.substr(0, markers.front());
  if (!seed.ends_with('\n')) throw ConsistencyError("library file: missing blank line before first entry");
  seed.remove_suffix(1);
  Library library{std::string(seed)};

  for (std::size_t k = 0; k < markers.size(); ++k) {
    std::size_t end = k + 1 < markers.size() ? markers[k + 1] : file.size();
    std::string_view block = file.substr(markers[k], end - markers[k]);
    auto eol = block.find('\n');
    if (eol == std::string_view::npos) throw ConsistencyError("library file: entry marker without declaration");
    std::string_view marker = block.substr(kMarkerPrefix.size(), eol - kMarkerPrefix.size());
    if (!marker.ends_with(']')) throw ConsistencyError("library file: malformed entry marker");
    marker.remove_suffix(1);
    std::istringstream fields{std::string(marker)};
    std::size_t index = 0;
    std::string provenance;
    std::string created_at;
    if (!(fields >> index >> provenance >> created_at)) {
      throw ConsistencyError("library file: malformed entry marker '" + std::string(marker) + "'");
    }
    if (index != library.size()) {
      throw ConsistencyError("library file: entry index " + std::to_string(index) +
                             " out of sequence (expected " + std::to_string(library.size()) + ")");
    }
    auto decl = parse_proved_declaration(block.substr(eol + 1));
    if (!decl) {
      throw ConsistencyError("library file: entry " + std::to_string(index) +
                             " has no theorem declaration");
    }
    if (auto why = ProofScript::violation(decl->proof_text)) {
      throw ConsistencyError("library file: entry " + std::to_string(index) + ": " + *why);
    }
    const auto& stored = library.append(decl->statement, ProofScript(decl->proof_text),
                                        provenance_from_string(provenance), created_at);
    if (stored.statement.name() != decl->statement.name()) {
      throw ConsistencyError("library file: duplicate theorem name '" + decl->statement.name() +
                             "' at entry " + std::to_string(index));
    }
  }
  return library;
}

void write_library_file(const Library& library, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << render_library_file(library);
    out.flush();
    if (!out) throw ConfigError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Library read_library_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read library file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_library_file(ss.str());
}

RenderedContext render_context(const Library& library, std::span<const TheoremStatement> extras,
                               std::size_t budget) {
  const auto& seed = library.seed_source();
  std::vector<std::string> pieces;
  for (const auto& e : library.entries()) pieces.push_back(e.declaration());
  std::size_t entry_count = pieces.size();
  for (const auto& s : extras) pieces.push_back(s.source_text());

  std::size_t first = 0;
  auto build = [&] {
    std::span<const std::string> tail(pieces.begin() + static_cast<std::ptrdiff_t>(first), pieces.end());
    return join_declarations(seed, tail);
  };
  std::string text = build();
  while (text::utf8_length(text) > budget && first < entry_count) {
    ++first;
    text = build();
  }
  if (text::utf8_length(text) > budget) {
    throw ContextError("context budget " + std::to_string(budget) +
                       " is smaller than the seed and pending statements (" +
                       std::to_string(text::utf8_length(text)) + " characters)");
  }

  RenderedContext out;
  out.dropped_entries = first;
  std::span<const std::string> kept(pieces.begin() + static_cast<std::ptrdiff_t>(first),
                                    pieces.begin() + static_cast<std::ptrdiff_t>(entry_count));
  out.library_length = join_declarations(seed, kept).size();
  out.text = std::move(text);
  if (first > 0) {
    out.warnings.push_back("context truncated: dropped " + std::to_string(first) +
                           " oldest library entries to fit " + std::to_string(budget) + " characters");
  }
  return out;
}

}  // namespace cpl
