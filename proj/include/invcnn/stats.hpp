#ifndef INVCNN_STATS_HPP
#define INVCNN_STATS_HPP

#include "invcnn/common.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace invcnn {

inline double sample_mean(const std::vector<double>& v) {
  if (v.empty()) throw ArgumentError("sample_mean: empty set");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Unbiased (n - 1) sample variance.
inline double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) throw ArgumentError("sample_variance: need at least two values");
  const double m = sample_mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size() - 1);
}

/// T = (mean1 - mean2) / sqrt(var1 / n1 + var2 / n2).
/// Zero spread: 0 for equal means, signed infinity otherwise.
inline double welch_t(const std::vector<double>& set1, const std::vector<double>& set2) {
  if (set1.size() < 2 || set2.size() < 2) throw ArgumentError("welch_t: each set needs at least two values");
  const double diff = sample_mean(set1) - sample_mean(set2);
  const double se2 = sample_variance(set1) / static_cast<double>(set1.size()) +
                     sample_variance(set2) / static_cast<double>(set2.size());
  if (se2 == 0.0) {
    if (diff == 0.0) return 0.0;
    return diff > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  }
  return diff / std::sqrt(se2);
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw ArgumentError("median: empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace invcnn

#endif  // INVCNN_STATS_HPP
