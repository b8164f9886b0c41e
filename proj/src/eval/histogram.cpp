#include "cpl/eval/histogram.hpp"

#include <map>
#include <sstream>

#include "cpl/error.hpp"

namespace cpl {

std::vector<HistogramBin> histogram(std::span<const std::size_t> lengths, std::size_t bin_width) {
  if (bin_width == 0) throw ConfigError("bin width must be at least 1");
  std::map<std::size_t, std::size_t> bins;
  for (auto len : lengths) ++bins[len / bin_width * bin_width];
  std::vector<HistogramBin> out;
  for (const auto& [start, count] : bins) out.push_back({start, count});
  return out;
}

std::vector<HistogramBin> proof_length_histogram(const Library& library, std::size_t bin_width,
                                                 LengthMetric metric) {
  std::vector<std::size_t> lengths;
  for (const auto& e : library.entries()) lengths.push_back(proof_length(e.proof, metric));
  return histogram(lengths, bin_width);
}

std::string histogram_csv(const std::vector<HistogramBin>& bins, std::size_t bin_width) {
  std::ostringstream out;
  out << "bin_start,bin_end,count\n";
  for (const auto& b : bins) out << b.start << ',' << b.start + bin_width << ',' << b.count << '\n';
  return out.str();
}

std::string histogram_table(const std::vector<HistogramBin>& bins, std::size_t bin_width) {
  std::ostringstream out;
  out << "proof length    count\n";
  std::size_t total = 0;
  for (const auto& b : bins) {
    std::string range = "[" + std::to_string(b.start) + ", " + std::to_string(b.start + bin_width) + ")";
    out << range << std::string(range.size() < 16 ? 16 - range.size() : 1, ' ') << b.count << '\n';
    total += b.count;
  }
  out << "total           " << total << '\n';
  return out.str();
}

}  // namespace cpl
