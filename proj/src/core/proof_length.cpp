#include "cpl/core/proof_length.hpp"

#include "cpl/core/lean_source.hpp"
#include "cpl/core/text.hpp"
#include "cpl/error.hpp"

namespace cpl {

std::string to_string(LengthMetric m) { return m == LengthMetric::lines ? "lines" : "chars"; }

LengthMetric length_metric_from_string(std::string_view s) {
  if (s == "lines") return LengthMetric::lines;
  if (s == "chars") return LengthMetric::chars;
  throw ConfigError("unknown proof-length metric '" + std::string(s) + "' (expected lines|chars)");
}

std::size_t proof_length(const ProofScript& proof) {
  return proof_length(proof, LengthMetric::lines);
}

std::size_t proof_length(const ProofScript& proof, LengthMetric metric) {
  std::string_view src = proof.text();
  if (src.empty()) throw InvariantError("proof_length of an empty proof");
  auto kinds = lean::classify(src);
  std::size_t count = 0;
  if (metric == LengthMetric::chars) {
    for (std::size_t i = 0; i < src.size(); ++i) {
      auto u = static_cast<unsigned char>(src[i]);
      if (kinds[i] != lean::ByteKind::comment && !text::is_space(src[i]) && (u & 0xC0) != 0x80) {
        ++count;
      }
    }
    return count;
  }
  bool has_code = false;
  for (std::size_t i = 0; i <= src.size(); ++i) {
    if (i == src.size() || src[i] == '\n') {
      if (has_code) ++count;
      has_code = false;
      continue;
    }
    if (kinds[i] != lean::ByteKind::comment && !text::is_space(src[i])) has_code = true;
  }
  return count;
}

}  // namespace cpl
