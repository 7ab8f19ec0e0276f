#ifndef INVCNN_COHERENCY_HPP
#define INVCNN_COHERENCY_HPP

// Spatial coherency of a patch: how strongly its local gradients share one
// orientation. Oriented structure scores near 1, isotropic texture near 0.

#include "invcnn/common.hpp"

#include <algorithm>
#include <vector>

namespace invcnn {

struct GradientPair {
  Matrix gx;  // d/dx along columns
  Matrix gy;  // d/dy along rows
};

/// Central differences on the interior grid, (rows-2) x (cols-2).
inline GradientPair gradients(const Patch& p) {
  if (p.rows() < 3 || p.cols() < 3) throw DimensionError("gradients: patch must be at least 3x3");
  const Index r = p.rows() - 2;
  const Index c = p.cols() - 2;
  GradientPair g{Matrix(r, c), Matrix(r, c)};
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) {
      g.gx(i, j) = (p(i + 1, j + 2) - p(i + 1, j)) / 2.0;
      g.gy(i, j) = (p(i + 2, j + 1) - p(i, j + 1)) / 2.0;
    }
  return g;
}

struct CoherencyScore {
  double mu = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

namespace detail {

// Sums after sorting so the result does not depend on traversal order; this
// keeps the score bit-identical under 90 degree rotations of the patch.
inline double order_free_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

}  // namespace detail

/// mu = (sqrt(l1) - sqrt(l2)) / (sqrt(l1) + sqrt(l2)) for the eigenvalues of
/// the 2x2 gradient covariance G G^T. Flat patches score 0.
inline CoherencyScore spatial_coherency(const Patch& p) {
  const GradientPair g = gradients(p);
  const auto m = static_cast<std::size_t>(g.gx.size());
  std::vector<double> xx(m), yy(m), xy(m);
  for (Index k = 0; k < g.gx.size(); ++k) {
    const double gx = g.gx.data()[k];
    const double gy = g.gy.data()[k];
    xx[static_cast<std::size_t>(k)] = gx * gx;
    yy[static_cast<std::size_t>(k)] = gy * gy;
    xy[static_cast<std::size_t>(k)] = gx * gy;
  }
  const double a = detail::order_free_sum(xx);
  const double d = detail::order_free_sum(yy);
  // |sum| is unchanged when every product flips sign, so sum magnitudes per sign.
  std::vector<double> pos, neg;
  for (double v : xy) (v >= 0.0 ? pos : neg).push_back(std::abs(v));
  const double b = detail::order_free_sum(pos) - detail::order_free_sum(neg);

  const double half_trace = (a + d) / 2.0;
  const double half_gap = std::sqrt((a - d) * (a - d) / 4.0 + b * b);
  CoherencyScore s;
  s.lambda1 = half_trace + half_gap;
  s.lambda2 = std::max(half_trace - half_gap, 0.0);
  const double r1 = std::sqrt(s.lambda1);
  const double r2 = std::sqrt(s.lambda2);
  s.mu = r1 + r2 > 0.0 ? std::clamp((r1 - r2) / (r1 + r2), 0.0, 1.0) : 0.0;
  return s;
}

struct CorpusSplit {
  std::vector<std::size_t> high;  // mu >= tau, input order
  std::vector<std::size_t> low;
  std::vector<double> scores;
};

inline CorpusSplit partition_scores(const std::vector<double>& scores, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ArgumentError("partition_corpus: tau must lie in [0, 1]");
  CorpusSplit s;
  s.scores = scores;
  for (std::size_t i = 0; i < scores.size(); ++i) (scores[i] >= tau ? s.high : s.low).push_back(i);
  return s;
}

inline CorpusSplit partition_corpus(const std::vector<Patch>& patches, double tau) {
  std::vector<double> scores;
  scores.reserve(patches.size());
  for (const auto& p : patches) scores.push_back(spatial_coherency(p).mu);
  return partition_scores(scores, tau);
}

/// Median of the scores; the default split threshold.
inline double median_threshold(std::vector<double> scores) {
  if (scores.empty()) throw ArgumentError("median_threshold: no scores");
  std::sort(scores.begin(), scores.end());
  const std::size_t n = scores.size();
  return n % 2 == 1 ? scores[n / 2] : 0.5 * (scores[n / 2 - 1] + scores[n / 2]);
}

}  // namespace invcnn

#endif  // INVCNN_COHERENCY_HPP
