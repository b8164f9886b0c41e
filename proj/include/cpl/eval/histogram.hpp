#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cpl/core/library.hpp"
#include "cpl/core/proof_length.hpp"

namespace cpl {

struct HistogramBin {
  std::size_t start = 0;  // covers [start, start + width)
  std::size_t count = 0;

  friend bool operator==(const HistogramBin&, const HistogramBin&) = default;
};

/// Non-empty bins in ascending order. Counts always sum to `lengths.size()`.
std::vector<HistogramBin> histogram(std::span<const std::size_t> lengths, std::size_t bin_width);

std::vector<HistogramBin> proof_length_histogram(const Library& library, std::size_t bin_width,
                                                 LengthMetric metric = LengthMetric::lines);

/// `bin_start,bin_end,count` with a header row.
std::string histogram_csv(const std::vector<HistogramBin>& bins, std::size_t bin_width);
std::string histogram_table(const std::vector<HistogramBin>& bins, std::size_t bin_width);

}  // namespace cpl
