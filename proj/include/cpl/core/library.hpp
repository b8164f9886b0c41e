#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpl/core/statement.hpp"

namespace cpl {

enum class Provenance { cpl, simple_loop, fixture };

std::string to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

struct LibraryEntry {
  TheoremStatement statement;
  ProofScript proof;
  std::size_t sequence_index = 0;
  Provenance provenance = Provenance::cpl;
  std::string created_at;  // ISO-8601 UTC

  /// `theorem <name> <signature> := <proof>`
  std::string declaration() const { return statement.with_proof(proof.text()); }

  friend bool operator==(const LibraryEntry&, const LibraryEntry&) = default;
};

/// Seed source plus an append-only sequence of verified theorems.
class Library {
 public:
  explicit Library(std::string seed_source) : seed_source_(std::move(seed_source)) {}

  const std::string& seed_source() const { return seed_source_; }
  const std::vector<LibraryEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  bool contains_name(std::string_view name) const;

  /// Appends a verified theorem. A name already used by an earlier entry is
  /// suffixed with `_<sequence_index>`.
  const LibraryEntry& append(const TheoremStatement& statement, ProofScript proof,
                             Provenance provenance, std::string created_at);

  /// The library restricted to its first `n` entries.
  Library prefix(std::size_t n) const;

  friend bool operator==(const Library&, const Library&) = default;

 private:
  std::string seed_source_;
  std::vector<LibraryEntry> entries_;
};

/// `-- [cpl:entry <index> <provenance> <timestamp>]`
std::string entry_marker(const LibraryEntry& entry);

/// On-disk form: the seed verbatim, then each entry as a marker comment
/// line followed by its declaration, entries separated by one blank line.
std::string render_library_file(const Library& library);
Library parse_library_file(std::string_view text);

/// Writes via a temporary file and rename.
void write_library_file(const Library& library, const std::filesystem::path& path);
Library read_library_file(const std::filesystem::path& path);

struct RenderedContext {
  std::string text;
  /// Byte length of the seed-plus-entries prefix of `text` (everything
  /// before the extras).
  std::size_t library_length = 0;
  std::size_t dropped_entries = 0;
  std::vector<std::string> warnings;

  std::string library_part() const { return text.substr(0, library_length); }
};

/// Seed, then entries (with proofs) in sequence order, then `extras` with
/// `sorry` proofs. When the result exceeds `budget` characters the oldest
/// entries are dropped; the seed and extras are never dropped. Throws
/// ContextError if the seed and extras alone exceed the budget.
RenderedContext render_context(const Library& library, std::span<const TheoremStatement> extras,
                               std::size_t budget);

/// Seed, then `declarations` separated by blank lines. Shared by the context
/// renderer and the verifier.
std::string join_declarations(std::string_view seed, std::span<const std::string> declarations);

}  // namespace cpl
