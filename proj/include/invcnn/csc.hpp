#ifndef INVCNN_CSC_HPP
#define INVCNN_CSC_HPP

// Layered convolutional sparse coding: reconstruction dictionaries built from
// a layer's filters, mutual coherence, layered soft thresholding and the
// stability bounds that guarantee it recovers the true supports.

#include "invcnn/neuron.hpp"
#include "invcnn/proximal.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace invcnn {

/// Columns are the vectorized filters of one layer, in input order.
struct ReconstructionDictionary {
  Matrix data;
  Vector column_norms;  // norms before any normalization
  bool normalized = false;

  Index atoms() const { return data.cols(); }
};

inline ReconstructionDictionary build_reconstruction_dictionary(const std::vector<Vector>& filters,
                                                                bool normalize = false) {
  if (filters.empty()) throw DimensionError("build_reconstruction_dictionary: no filters");
  const Index len = filters.front().size();
  ReconstructionDictionary d;
  d.data.resize(len, static_cast<Index>(filters.size()));
  d.column_norms.resize(d.data.cols());
  for (std::size_t j = 0; j < filters.size(); ++j) {
    if (filters[j].size() != len) throw DimensionError("build_reconstruction_dictionary: mixed filter lengths");
    const auto col = static_cast<Index>(j);
    d.data.col(col) = filters[j];
    d.column_norms[col] = filters[j].norm();
    if (normalize && d.column_norms[col] > 0.0) d.data.col(col) /= d.column_norms[col];
  }
  d.normalized = normalize;
  return d;
}

inline ReconstructionDictionary build_reconstruction_dictionary(const std::vector<NeuronFilter>& filters,
                                                                bool normalize = false) {
  std::vector<Vector> cols;
  cols.reserve(filters.size());
  for (const auto& f : filters) cols.push_back(f.coeffs);
  return build_reconstruction_dictionary(cols, normalize);
}

enum class CoherenceMode {
  min,  // min_{n != m} |d_n^T d_m|, the definition used for the layer tables
  max,  // max_{n != m} |d_n^T d_m|, the usual sparse-coding definition
};

/// Coherence over all unordered column pairs. With `normalized` each inner
/// product is divided by the two column norms; zero columns give 0.
inline double mutual_coherence(const Matrix& d, CoherenceMode mode, bool normalized) {
  if (d.cols() < 2) throw DimensionError("mutual_coherence: needs at least two atoms");
  const Matrix gram = d.transpose() * d;
  double best = mode == CoherenceMode::min ? std::numeric_limits<double>::infinity() : 0.0;
  for (Index n = 0; n < d.cols(); ++n) {
    for (Index m = n + 1; m < d.cols(); ++m) {
      double v = std::abs(gram(n, m));
      if (normalized) {
        const double denom = std::sqrt(gram(n, n) * gram(m, m));
        v = denom > 0.0 ? v / denom : 0.0;
      }
      best = mode == CoherenceMode::min ? std::min(best, v) : std::max(best, v);
    }
  }
  return best;
}

inline double mutual_coherence(const ReconstructionDictionary& d, CoherenceMode mode, bool normalized) {
  return mutual_coherence(d.data, mode, normalized);
}

/// x^_i = S_{b_i}(D_i^T x^_{i-1}),  x^_0 = g. Returns x^_1 .. x^_N.
inline std::vector<Vector> layered_soft_threshold(const Vector& g, const std::vector<Matrix>& dictionaries,
                                                  const std::vector<double>& biases) {
  if (dictionaries.size() != biases.size())
    throw DimensionError("layered_soft_threshold: one bias per layer");
  std::vector<Vector> out;
  out.reserve(dictionaries.size());
  Vector cur = g;
  for (std::size_t i = 0; i < dictionaries.size(); ++i) {
    if (dictionaries[i].rows() != cur.size())
      throw DimensionError("layered_soft_threshold: dictionary chain mismatch");
    cur = soft_sym(dictionaries[i].transpose() * cur, biases[i]);
    out.push_back(cur);
  }
  return out;
}

/// Right-hand side of ||x_i||_0 < 1/2 + (1 / mu) (1 / (2 |x^max|)) (|x^min| - 2 eps_{i-1}).
/// An orthogonal dictionary (mu == 0) admits any sparsity: +inf.
inline double sparsity_condition_rhs(double mu, double x_min, double x_max, double eps_prev) {
  if (mu < 0.0) throw ArgumentError("sparsity_condition_rhs: mu must be >= 0");
  if (!(x_max > 0.0)) throw ArgumentError("sparsity_condition_rhs: x_max must be positive");
  const double slack = std::abs(x_min) - 2.0 * eps_prev;
  if (mu == 0.0) return slack > 0.0 ? std::numeric_limits<double>::infinity() : 0.5;
  return 0.5 + slack / (2.0 * mu * std::abs(x_max));
}

/// eps_i = sqrt(s) (eps_{i-1} + mu (s - 1) |x^max| + b_i)
inline double epsilon_recursion(Index sparsity, double eps_prev, double mu, double x_max, double bias) {
  if (sparsity < 1) throw ArgumentError("epsilon_recursion: sparsity must be >= 1");
  const double s = static_cast<double>(sparsity);
  return std::sqrt(s) * (eps_prev + mu * (s - 1.0) * std::abs(x_max) + bias);
}

struct CoherenceBound {
  double value = 0.0;
  bool vacuous = false;  // value <= 0: every dictionary satisfies it
};

/// mu(D_i) > (2 eps_{i-1} - sqrt(eps_{i-1}) - sqrt(eps_i)) / ||x_i||_2
inline CoherenceBound coherence_lower_bound(double eps_prev, double eps_i, double x_norm2) {
  if (!(x_norm2 > 0.0)) throw ArgumentError("coherence_lower_bound: ||x||_2 must be positive");
  if (eps_prev < 0.0 || eps_i < 0.0) throw ArgumentError("coherence_lower_bound: negative epsilon");
  const double v = (2.0 * eps_prev - std::sqrt(eps_prev) - std::sqrt(eps_i)) / x_norm2;
  return {v, v <= 0.0};
}

// ---------------------------------------------------------------------------
// Synthetic layered instances
// ---------------------------------------------------------------------------

/// g = y + n,  y = D_1 x_1,  x_{i-1} = D_i x_i.
struct CscInstance {
  std::vector<Matrix> dictionaries;     // D_1 .. D_N, unit-norm columns
  std::vector<Vector> representations;  // x_1 .. x_N
  std::vector<double> biases;           // b_1 .. b_N
  double noise_bound = 0.0;             // ||n||_2
  Vector signal;                        // y
  Vector observation;                   // g
};

struct SynthesisOptions {
  /// dims[0] is the signal length, dims[i] the length of x_i.
  std::vector<Index> dims{64, 48, 32};
  std::vector<Index> sparsities{3, 2};
  double coherence_target = 0.1;
  double noise_bound = 0.0;
  double x_min = 1.0;
  double x_max = 2.0;
  std::uint64_t seed = 1;
  int attempt_budget = 200;
};

inline double welch_bound(Index rows, Index atoms) {
  if (atoms <= rows) return 0.0;
  return std::sqrt(static_cast<double>(atoms - rows) / (static_cast<double>(rows) * static_cast<double>(atoms - 1)));
}

namespace detail {

inline std::vector<Index> random_support(std::mt19937_64& rng, Index n, Index k) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline Vector gaussian_on(std::mt19937_64& rng, Index n, const std::vector<Index>* rows) {
  std::normal_distribution<double> gauss;
  Vector v = Vector::Zero(n);
  if (rows == nullptr) {
    for (Index i = 0; i < n; ++i) v[i] = gauss(rng);
  } else {
    for (Index r : *rows) v[r] = gauss(rng);
  }
  return v;
}

/// Unit-column dictionary rows x atoms. Columns listed in `constrained` are
/// supported only on `allowed_rows` (when given). Tall dictionaries start from
/// an orthonormal set and are perturbed by `spread`; wide ones are Gaussian.
inline Matrix draw_dictionary(std::mt19937_64& rng, Index rows, Index atoms, const std::vector<Index>& constrained,
                              const std::vector<Index>* allowed_rows, double spread) {
  Matrix d = Matrix::Zero(rows, atoms);
  std::vector<bool> is_constrained(static_cast<std::size_t>(atoms), false);
  for (Index c : constrained) is_constrained[static_cast<std::size_t>(c)] = true;

  auto column_rows = [&](Index c) { return is_constrained[static_cast<std::size_t>(c)] ? allowed_rows : nullptr; };

  if (atoms <= rows) {
    std::vector<Index> order = constrained;
    for (Index c = 0; c < atoms; ++c)
      if (!is_constrained[static_cast<std::size_t>(c)]) order.push_back(c);
    std::vector<Index> done;
    for (Index c : order) {
      Vector v = gaussian_on(rng, rows, column_rows(c));
      for (int pass = 0; pass < 2; ++pass)
        for (Index p : done) v -= d.col(p).dot(v) * d.col(p);
      const double nrm = v.norm();
      if (nrm < 1e-12) throw SynthesisFailure("draw_dictionary: degenerate orthogonalization");
      d.col(c) = v / nrm;
      done.push_back(c);
    }
    if (spread > 0.0) {
      const double scale = spread / std::sqrt(static_cast<double>(rows));
      for (Index c = 0; c < atoms; ++c) {
        d.col(c) += scale * gaussian_on(rng, rows, column_rows(c));
        d.col(c).normalize();
      }
    }
  } else {
    for (Index c = 0; c < atoms; ++c) {
      Vector v = gaussian_on(rng, rows, column_rows(c));
      d.col(c) = v / v.norm();
    }
  }
  return d;
}

}  // namespace detail

/// Random layered instance with max-mode coherence <= coherence_target in
/// every layer. Atoms of D_i that x_i uses are supported on the support of
/// x_{i-1}, which keeps every representation exactly sparse. Dictionaries are
/// rejection-sampled; infeasible targets raise SynthesisFailure.
inline CscInstance synthesize_instance(const SynthesisOptions& opt) {
  const std::size_t layers = opt.sparsities.size();
  if (layers < 1 || opt.dims.size() != layers + 1)
    throw ArgumentError("synthesize_instance: need dims.size() == layers + 1");
  for (std::size_t i = 0; i < layers; ++i) {
    if (opt.sparsities[i] < 1 || opt.sparsities[i] > opt.dims[i + 1])
      throw ArgumentError("synthesize_instance: sparsity out of range");
    if (i > 0 && opt.sparsities[i] > opt.sparsities[i - 1])
      throw SynthesisFailure("synthesize_instance: a layer cannot use more atoms than the support they live on");
  }
  if (!(opt.x_min > 0.0) || opt.x_max < opt.x_min) throw ArgumentError("synthesize_instance: bad magnitude range");
  if (opt.coherence_target < 0.0 || opt.noise_bound < 0.0) throw ArgumentError("synthesize_instance: negative target");

  std::mt19937_64 rng(opt.seed);

  std::vector<std::vector<Index>> supports(layers);
  for (std::size_t i = 0; i < layers; ++i) supports[i] = detail::random_support(rng, opt.dims[i + 1], opt.sparsities[i]);

  CscInstance inst;
  inst.dictionaries.resize(layers);
  for (std::size_t i = 0; i < layers; ++i) {
    const Index rows = opt.dims[i];
    const Index atoms = opt.dims[i + 1];
    if (opt.coherence_target < welch_bound(rows, atoms))
      throw SynthesisFailure("synthesize_instance: coherence target below the Welch bound");
    const std::vector<Index>* allowed = i == 0 ? nullptr : &supports[i - 1];
    double spread = opt.coherence_target;
    bool accepted = false;
    for (int attempt = 0; attempt < opt.attempt_budget && !accepted; ++attempt) {
      Matrix d = detail::draw_dictionary(rng, rows, atoms, supports[i], allowed, spread);
      if (atoms < 2 || mutual_coherence(d, CoherenceMode::max, true) <= opt.coherence_target + 1e-12) {
        inst.dictionaries[i] = std::move(d);
        accepted = true;
      }
      spread *= 0.7;
    }
    if (!accepted) throw SynthesisFailure("synthesize_instance: attempt budget exhausted");
  }

  std::uniform_real_distribution<double> mag(opt.x_min, opt.x_max);
  std::bernoulli_distribution coin(0.5);
  inst.representations.resize(layers);
  Vector x = Vector::Zero(opt.dims[layers]);
  for (Index s : supports[layers - 1]) x[s] = (coin(rng) ? 1.0 : -1.0) * mag(rng);
  inst.representations[layers - 1] = x;
  for (std::size_t i = layers - 1; i > 0; --i) inst.representations[i - 1] = inst.dictionaries[i] * inst.representations[i];
  inst.signal = inst.dictionaries[0] * inst.representations[0];

  Vector noise = detail::gaussian_on(rng, opt.dims[0], nullptr);
  inst.noise_bound = opt.noise_bound;
  inst.observation = inst.signal + (noise.norm() > 0.0 ? (opt.noise_bound / noise.norm()) * noise : noise);

  // Smallest bias that zeroes every off-support coefficient.
  double eps = opt.noise_bound;
  inst.biases.resize(layers);
  for (std::size_t i = 0; i < layers; ++i) {
    const Vector& xi = inst.representations[i];
    const double mu = inst.dictionaries[i].cols() >= 2 ? mutual_coherence(inst.dictionaries[i], CoherenceMode::max, true) : 0.0;
    const Index s = static_cast<Index>((xi.array() != 0.0).count());
    const double x_max = xi.cwiseAbs().maxCoeff();
    inst.biases[i] = mu * static_cast<double>(s) * x_max + eps;
    eps = epsilon_recursion(std::max<Index>(s, 1), eps, mu, x_max, inst.biases[i]);
  }
  return inst;
}

/// Checks y = D_1 x_1 and x_{i-1} = D_i x_i within `tol`.
inline bool validate_instance(const CscInstance& inst, double tol = 1e-10) {
  if (inst.dictionaries.empty() || inst.dictionaries.size() != inst.representations.size()) return false;
  if ((inst.dictionaries[0] * inst.representations[0] - inst.signal).cwiseAbs().maxCoeff() > tol) return false;
  for (std::size_t i = 1; i < inst.dictionaries.size(); ++i)
    if ((inst.dictionaries[i] * inst.representations[i] - inst.representations[i - 1]).cwiseAbs().maxCoeff() > tol)
      return false;
  for (const auto& x : inst.representations)
    if ((x.array() != 0.0).count() == 0) return false;
  return true;
}

struct LayerStability {
  std::size_t layer = 0;  // 1-based
  double mu_max = 0.0;
  double mu_min = 0.0;
  Index sparsity = 0;
  double x_min = 0.0;
  double x_max = 0.0;
  double bias = 0.0;
  double sparsity_rhs = 0.0;
  double epsilon = 0.0;
  bool condition_met = false;
  bool support_recovered = false;
  double error_norm = 0.0;
  bool within_bound = false;
};

struct StabilityReport {
  std::vector<LayerStability> layers;

  bool all_conditions_met() const {
    return std::all_of(layers.begin(), layers.end(), [](const auto& l) { return l.condition_met; });
  }
  bool all_recovered() const {
    return std::all_of(layers.begin(), layers.end(),
                       [](const auto& l) { return l.support_recovered && l.within_bound; });
  }
};

/// Runs layered soft thresholding on the instance and scores every layer
/// against the sparsity condition and the error recursion.
inline StabilityReport verify_instance(const CscInstance& inst) {
  const std::vector<Vector> est = layered_soft_threshold(inst.observation, inst.dictionaries, inst.biases);
  StabilityReport rep;
  double eps = inst.noise_bound;
  for (std::size_t i = 0; i < inst.dictionaries.size(); ++i) {
    const Vector& x = inst.representations[i];
    LayerStability l;
    l.layer = i + 1;
    const bool two = inst.dictionaries[i].cols() >= 2;
    l.mu_max = two ? mutual_coherence(inst.dictionaries[i], CoherenceMode::max, true) : 0.0;
    l.mu_min = two ? mutual_coherence(inst.dictionaries[i], CoherenceMode::min, true) : 0.0;
    l.sparsity = static_cast<Index>((x.array() != 0.0).count());
    double lo = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < x.size(); ++k)
      if (x[k] != 0.0) lo = std::min(lo, std::abs(x[k]));
    l.x_min = lo;
    l.x_max = x.cwiseAbs().maxCoeff();
    l.bias = inst.biases[i];
    l.sparsity_rhs = sparsity_condition_rhs(l.mu_max, l.x_min, l.x_max, eps);
    l.condition_met = static_cast<double>(l.sparsity) < l.sparsity_rhs;
    l.epsilon = epsilon_recursion(std::max<Index>(l.sparsity, 1), eps, l.mu_max, l.x_max, l.bias);
    bool same = true;
    for (Index k = 0; k < x.size(); ++k) same = same && ((x[k] != 0.0) == (est[i][k] != 0.0));
    l.support_recovered = same;
    l.error_norm = (x - est[i]).norm();
    l.within_bound = l.error_norm <= l.epsilon * (1.0 + 1e-12);
    rep.layers.push_back(l);
    eps = l.epsilon;
  }
  return rep;
}

}  // namespace invcnn

#endif  // INVCNN_CSC_HPP
