#pragma once

#include <cstddef>
#include <string>

namespace cpl {

/// An exact success rate. Rendering rounds to a whole percent (half up);
/// the fraction itself is never rounded.
struct Fraction {
  std::size_t numerator = 0;
  std::size_t denominator = 0;

  std::string exact() const { return std::to_string(numerator) + "/" + std::to_string(denominator); }
  std::string percent() const {
    if (denominator == 0) return "n/a";
    return std::to_string((200 * numerator + denominator) / (2 * denominator)) + "%";
  }
  double value() const { return denominator == 0 ? 0.0 : static_cast<double>(numerator) / denominator; }

  friend bool operator==(const Fraction&, const Fraction&) = default;
};

}  // namespace cpl
