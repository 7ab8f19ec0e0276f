#ifndef INVCNN_CONV_ALGEBRA_HPP
#define INVCNN_CONV_ALGEBRA_HPP

// Convolution written as dictionary algebra.
//
// All convolutions are valid-only correlations (no kernel flip, no padding).
// Patches are vectorized row-major: element (i, j) of an r x c patch lands at
// index i * c + j.

#include "invcnn/common.hpp"

namespace invcnn {

inline Vector vectorize_lex(const Patch& p) {
  if (p.rows() < 1 || p.cols() < 1) throw DimensionError("vectorize_lex: empty patch");
  Vector v(p.size());
  for (Index i = 0; i < p.rows(); ++i)
    for (Index j = 0; j < p.cols(); ++j) v[i * p.cols() + j] = p(i, j);
  return v;
}

inline Patch unvectorize_lex(const Vector& v, Index rows, Index cols) {
  if (rows < 1 || cols < 1 || v.size() != rows * cols)
    throw DimensionError("unvectorize_lex: length does not match shape");
  Patch p(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) p(i, j) = v[i * cols + j];
  return p;
}

/// Side length of a square patch stored as a lexicographic vector.
inline Index square_side(Index length) {
  const auto side = static_cast<Index>(std::lround(std::sqrt(static_cast<double>(length))));
  if (side < 1 || side * side != length)
    throw DimensionError("vector length is not a perfect square");
  return side;
}

/// out(i, j) = sum_{u,v} x(i + u, j + v) * f(u, v)
inline Patch valid_correlate(const Patch& x, const Patch& f) {
  if (f.rows() < 1 || f.cols() < 1 || x.rows() < 1 || x.cols() < 1)
    throw DimensionError("valid_correlate: empty operand");
  if (f.rows() > x.rows() || f.cols() > x.cols())
    throw DimensionError("valid_correlate: filter larger than input");
  const Index out_r = x.rows() - f.rows() + 1;
  const Index out_c = x.cols() - f.cols() + 1;
  Patch out(out_r, out_c);
  for (Index i = 0; i < out_r; ++i)
    for (Index j = 0; j < out_c; ++j)
      out(i, j) = (x.block(i, j, f.rows(), f.cols()).array() * f.array()).sum();
  return out;
}

/// D_L = W_{c,a}(x): row r is the lexicographic vector of the a x a window at
/// sliding position r, so that W(x) * vec(f) == vec(valid_correlate(x, f)).
struct LearningDictionary {
  Matrix data;
  Index source_size = 0;
  Index filter_size = 0;

  Index rows() const { return data.rows(); }
  Index cols() const { return data.cols(); }
};

inline LearningDictionary w_operator(const Patch& x, Index a) {
  if (x.rows() != x.cols()) throw DimensionError("w_operator: superpatch must be square");
  if (a < 1 || a > x.rows()) throw DimensionError("w_operator: filter size must be in [1, c]");
  const Index c = x.rows();
  const Index n = c - a + 1;
  LearningDictionary d;
  d.source_size = c;
  d.filter_size = a;
  d.data.resize(n * n, a * a);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index u = 0; u < a; ++u)
        for (Index v = 0; v < a; ++v) d.data(i * n + j, u * a + v) = x(i + u, j + v);
  return d;
}

/// Matrix form of valid correlation with a fixed filter on an n x n image:
/// shape (n - a + 1)^2 x n^2.
inline Matrix correlation_matrix(const Patch& f, Index n) {
  if (f.rows() != f.cols() || f.rows() < 1) throw DimensionError("correlation_matrix: filter must be square");
  const Index a = f.rows();
  if (n < a) throw DimensionError("correlation_matrix: image smaller than filter");
  const Index m = n - a + 1;
  Matrix op = Matrix::Zero(m * m, n * n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      for (Index u = 0; u < a; ++u)
        for (Index v = 0; v < a; ++v) op(i * m + j, (i + u) * n + (j + v)) = f(u, v);
  return op;
}

/// X_{e,a}(f): applies a second correlation with f to the (e-a+1) x (e-a+1)
/// output of a first a x a correlation on an e x e patch.
struct SwapOperatorMatrix {
  Matrix data;
  Index patch_size = 0;
  Index filter_size = 0;
};

inline SwapOperatorMatrix x_operator(const Patch& f, Index e) {
  if (f.rows() != f.cols() || f.rows() < 1) throw DimensionError("x_operator: filter must be square");
  const Index a = f.rows();
  if (e < 2 * a - 1) throw DimensionError("x_operator: requires e >= 2a - 1");
  return {correlation_matrix(f, e - a + 1), e, a};
}

}  // namespace invcnn

#endif  // INVCNN_CONV_ALGEBRA_HPP
