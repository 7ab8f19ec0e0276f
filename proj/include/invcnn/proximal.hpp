#ifndef INVCNN_PROXIMAL_HPP
#define INVCNN_PROXIMAL_HPP

// Thresholding operators, the Tikhonov closed form, and iterative
// shrinkage/thresholding (IST) for  min 1/2 ||g - K t||^2 + b ||t||_1.

#include "invcnn/common.hpp"

#include <algorithm>
#include <vector>

namespace invcnn {

/// sign(x) * max(|x| - b, 0), elementwise.
inline Vector soft_sym(const Vector& x, const Vector& b) {
  if (x.size() != b.size()) throw DimensionError("soft_sym: threshold length mismatch");
  if ((b.array() < 0.0).any()) throw ArgumentError("soft_sym: negative threshold");
  Vector out(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double mag = std::max(std::abs(x[i]) - b[i], 0.0);
    out[i] = x[i] < 0.0 ? -mag : mag;
  }
  return out;
}

inline Vector soft_sym(const Vector& x, double b) { return soft_sym(x, Vector::Constant(x.size(), b)); }

/// max(x - b, 0), elementwise. The activation of a neuron with bias b.
inline Vector soft_nn(const Vector& x, const Vector& b) {
  if (x.size() != b.size()) throw DimensionError("soft_nn: threshold length mismatch");
  return (x - b).cwiseMax(0.0);
}

inline Vector soft_nn(const Vector& x, double b) { return (x.array() - b).cwiseMax(0.0).matrix(); }

/// (K^T K + lambda I)^{-1} K^T g, solved as the least-squares problem on the
/// stacked system [K; sqrt(lambda) I] rather than by forming the inverse.
inline Vector landweber_solve(const Matrix& K, const Vector& g, double lambda) {
  if (K.rows() != g.size()) throw DimensionError("landweber_solve: g length must equal rows of K");
  if (!(lambda >= 0.0)) throw ArgumentError("landweber_solve: lambda must be >= 0");
  const Index n = K.cols();
  if (lambda == 0.0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(K);
    if (qr.rank() < n) throw SingularityError("landweber_solve: K^T K is singular and lambda = 0");
    return qr.solve(g);
  }
  Matrix stacked(K.rows() + n, n);
  stacked << K, std::sqrt(lambda) * Matrix::Identity(n, n);
  Vector rhs = Vector::Zero(K.rows() + n);
  rhs.head(K.rows()) = g;
  return stacked.colPivHouseholderQr().solve(rhs);
}

/// Largest singular value by power iteration on K^T K.
inline double spectral_norm(const Matrix& K, int iters = 1000) {
  if (K.size() == 0 || K.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  Vector v(K.cols());
  for (Index i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
  v.normalize();
  double sigma2 = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vector w = K.transpose() * (K * v);
    const double nrm = w.norm();
    if (nrm == 0.0) break;
    sigma2 = v.dot(w);
    v = w / nrm;
  }
  const Vector kv = K * v;
  return std::max(std::sqrt(std::max(sigma2, 0.0)), kv.norm());
}

/// An orthonormal basis {phi_l} stored column-wise.
class Basis {
 public:
  explicit Basis(Matrix vectors) : vectors_(std::move(vectors)) {
    if (vectors_.rows() != vectors_.cols()) throw DimensionError("Basis: must be square");
    const Matrix gram = vectors_.transpose() * vectors_;
    if ((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-10)
      throw ArgumentError("Basis: columns are not orthonormal");
  }

  static Basis canonical(Index n) { return Basis(Matrix::Identity(n, n)); }

  /// Orthonormal DCT-II basis; column l is the l-th cosine atom.
  static Basis dct(Index n) {
    Matrix m(n, n);
    const double pi = std::acos(-1.0);
    for (Index l = 0; l < n; ++l) {
      const double scale = l == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      for (Index i = 0; i < n; ++i)
        m(i, l) = scale * std::cos(pi * (static_cast<double>(i) + 0.5) * static_cast<double>(l) / n);
    }
    return Basis(std::move(m));
  }

  /// Flips column signs so every projection <x, phi_l> is nonnegative.
  Basis aligned_to(const Vector& x) const {
    if (x.size() != size()) throw DimensionError("Basis::aligned_to: length mismatch");
    Matrix m = vectors_;
    for (Index l = 0; l < m.cols(); ++l)
      if (m.col(l).dot(x) < 0.0) m.col(l) *= -1.0;
    return Basis(std::move(m));
  }

  const Matrix& vectors() const { return vectors_; }
  Index size() const { return vectors_.cols(); }

 private:
  Matrix vectors_;
};

/// Z_b(x) = sum_l S_{b_l}(<x, phi_l>) phi_l
inline Vector z_operator(const Vector& x, const Basis& basis, const Vector& biases) {
  if (x.size() != basis.size()) throw DimensionError("z_operator: x length must match basis");
  if (biases.size() != basis.size()) throw DimensionError("z_operator: one bias per basis vector");
  const Vector coeffs = basis.vectors().transpose() * x;
  return basis.vectors() * soft_sym(coeffs, biases);
}

struct IstOptions {
  int max_iter = 10000;
  double tol = 1e-8;
  /// Scalar stand-in for the per-basis learning rates; the threshold is
  /// scaled with it.
  double step = 1.0;
};

struct IstReport {
  Vector solution;
  int iterations = 0;
  /// ||t^n - t^{n-1}||_2 per iteration. Non-increasing for step * ||K||^2 <= 1.
  std::vector<double> residual_history;
  /// 1/2 ||g - K t^n||^2 + penalty(t^n) per iteration.
  std::vector<double> objective_history;
  bool converged = false;
};

namespace detail {

inline void check_ist_inputs(const Matrix& K, const Vector& g, const IstOptions& opt) {
  if (K.rows() != g.size()) throw DimensionError("ist: g length must equal rows of K");
  if (!(opt.step > 0.0)) throw ArgumentError("ist: step must be positive");
  const double norm = spectral_norm(K);
  if (opt.step * norm * norm > 1.0 + 1e-9)
    throw PreconditionError("ist: step * ||K||^2 exceeds 1; scale K by its spectral norm");
}

template <typename Prox, typename Penalty>
IstReport run_ist(const Matrix& K, const Vector& g, const IstOptions& opt, Prox prox, Penalty penalty) {
  IstReport rep;
  Vector t = Vector::Zero(K.cols());
  for (int n = 1; n <= opt.max_iter; ++n) {
    Vector next = prox(t + opt.step * (K.transpose() * (g - K * t)));
    const double change = (next - t).norm();
    t = std::move(next);
    rep.iterations = n;
    rep.residual_history.push_back(change);
    rep.objective_history.push_back(0.5 * (g - K * t).squaredNorm() + penalty(t));
    if (change < opt.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.solution = std::move(t);
  return rep;
}

}  // namespace detail

/// t^n = S_b(t^{n-1} + K^T (g - K t^{n-1})), starting from t^0 = 0.
inline IstReport ist_solve(const Matrix& K, const Vector& g, double b, const IstOptions& opt = {}) {
  if (b < 0.0) throw ArgumentError("ist_solve: negative threshold");
  detail::check_ist_inputs(K, g, opt);
  const double thr = opt.step * b;
  return detail::run_ist(
      K, g, opt, [thr](const Vector& v) { return soft_sym(v, thr); },
      [b](const Vector& t) { return b * t.lpNorm<1>(); });
}

/// t^n = Z_b(t^{n-1} + K^T (g - K t^{n-1})) with thresholds taken per basis vector.
inline IstReport ist_solve_basis(const Matrix& K, const Vector& g, const Basis& basis, const Vector& biases,
                                 const IstOptions& opt = {}) {
  if (basis.size() != K.cols()) throw DimensionError("ist_solve_basis: basis size must equal columns of K");
  if (biases.size() != basis.size()) throw DimensionError("ist_solve_basis: one bias per basis vector");
  if ((biases.array() < 0.0).any()) throw ArgumentError("ist_solve_basis: negative threshold");
  detail::check_ist_inputs(K, g, opt);
  const Vector thr = opt.step * biases;
  return detail::run_ist(
      K, g, opt, [&](const Vector& v) { return z_operator(v, basis, thr); },
      [&](const Vector& t) { return biases.dot((basis.vectors().transpose() * t).cwiseAbs()); });
}

/// Worst violation of the L1 optimality conditions at t:
///   K^T (g - K t) = b sign(t_i)   on the support,
///   |K^T (g - K t)_i| <= b        off it.
inline double lasso_kkt_residual(const Matrix& K, const Vector& g, const Vector& t, double b) {
  const Vector corr = K.transpose() * (g - K * t);
  double worst = 0.0;
  for (Index i = 0; i < t.size(); ++i) {
    const double v = t[i] != 0.0 ? std::abs(corr[i] - (t[i] > 0.0 ? b : -b))
                                 : std::max(std::abs(corr[i]) - b, 0.0);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace invcnn

#endif  // INVCNN_PROXIMAL_HPP
