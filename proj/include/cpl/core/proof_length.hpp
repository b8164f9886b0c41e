#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "cpl/core/statement.hpp"

namespace cpl {

enum class LengthMetric { lines, chars };

std::string to_string(LengthMetric m);
LengthMetric length_metric_from_string(std::string_view s);

/// Lines of proof text that are neither blank nor comment-only.
std::size_t proof_length(const ProofScript& proof);

/// `lines` as above; `chars` counts non-whitespace code points outside
/// comments.
std::size_t proof_length(const ProofScript& proof, LengthMetric metric);

}  // namespace cpl
