#ifndef INVCNN_NEURON_HPP
#define INVCNN_NEURON_HPP

// Training a single neuron filter, and a cascade of two, by gradient descent
// on 1/2 ||t - soft_b(D_L f)||^2, together with the rewritten update in which
// the whole iteration sits inside a nonnegative soft threshold with an
// adaptive bias b'.
//
// Activation ties (D_L f == b exactly) are treated as inactive.

#include "invcnn/conv_algebra.hpp"
#include "invcnn/proximal.hpp"

#include <random>
#include <vector>

namespace invcnn {

struct NeuronFilter {
  Vector coeffs;  // vec of an a x a filter
  double bias = 0.0;

  Index size() const { return square_side(coeffs.size()); }
  Patch as_patch() const { return unvectorize_lex(coeffs, size(), size()); }
};

struct TrainState {
  NeuronFilter filter;
  int iteration = 0;
  std::vector<double> mse_history;  // mse of the filter each step started from
};

struct MseGradient {
  double mse = 0.0;
  Vector gradient;
};

namespace detail {

inline void check_neuron(const LearningDictionary& d, const NeuronFilter& f) {
  if (d.cols() != f.coeffs.size()) throw DimensionError("neuron: filter length must equal dictionary columns");
}

inline void check_target(const Matrix& d, const Vector& t) {
  if (d.rows() != t.size()) throw DimensionError("neuron: target length must equal dictionary rows");
}

}  // namespace detail

inline Vector neuron_forward(const LearningDictionary& d, const NeuronFilter& f) {
  detail::check_neuron(d, f);
  return soft_nn(d.data * f.coeffs, f.bias);
}

/// Returns mse = 1/2 ||t - soft_b(D f)||^2 and the update gradient
/// -D^T (t - soft_b(D f)). Rows in the dead zone contribute -D_r^T t_r, which
/// is the piecewise training rule, not the chain-rule derivative; the two
/// agree whenever every row is active.
inline MseGradient mse_and_gradient(const LearningDictionary& d, const NeuronFilter& f, const Vector& t) {
  detail::check_neuron(d, f);
  detail::check_target(d.data, t);
  const Vector err = t - soft_nn(d.data * f.coeffs, f.bias);
  return {0.5 * err.squaredNorm(), -(d.data.transpose() * err)};
}

/// Chain-rule gradient of the mse: dead rows contribute nothing.
inline Vector mse_exact_gradient(const LearningDictionary& d, const NeuronFilter& f, const Vector& t) {
  detail::check_neuron(d, f);
  detail::check_target(d.data, t);
  const Vector z = d.data * f.coeffs;
  Vector masked(z.size());
  for (Index r = 0; r < z.size(); ++r) masked[r] = z[r] > f.bias ? t[r] - (z[r] - f.bias) : 0.0;
  return -(d.data.transpose() * masked);
}

/// f^n = f^{n-1} + D^T (t - soft_b(D f^{n-1}))
inline TrainState gd_step(const TrainState& state, const LearningDictionary& d, const Vector& t) {
  const MseGradient mg = mse_and_gradient(d, state.filter, t);
  TrainState next = state;
  next.filter.coeffs -= mg.gradient;
  next.iteration += 1;
  next.mse_history.push_back(mg.mse);
  return next;
}

/// b' = -D^T (m .* b + (1 - m) .* D f) with m_r = [ (D f)_r > b ].
inline Vector adaptive_bias(const LearningDictionary& d, const NeuronFilter& f) {
  detail::check_neuron(d, f);
  const Vector z = d.data * f.coeffs;
  Vector picked(z.size());
  for (Index r = 0; r < z.size(); ++r) picked[r] = z[r] > f.bias ? f.bias : z[r];
  return -(d.data.transpose() * picked);
}

/// f^n = soft_{b'}(f^{n-1} + D^T (t - D f^{n-1})). Matches gd_step while the
/// plain update stays nonnegative, which is the regime of nonnegative images.
inline TrainState gd_step_soft_form(const TrainState& state, const LearningDictionary& d, const Vector& t) {
  detail::check_neuron(d, state.filter);
  detail::check_target(d.data, t);
  const Vector& f = state.filter.coeffs;
  const Vector landweber = f + d.data.transpose() * (t - d.data * f);
  TrainState next = state;
  next.filter.coeffs = soft_nn(landweber, adaptive_bias(d, state.filter));
  next.iteration += 1;
  next.mse_history.push_back(0.5 * (t - soft_nn(d.data * f, state.filter.bias)).squaredNorm());
  return next;
}

/// Returns a copy of D divided by its spectral norm, so that unit steps are
/// non-expansive.
inline LearningDictionary spectrally_scaled(const LearningDictionary& d) {
  const double s = spectral_norm(d.data);
  if (s == 0.0) return d;
  LearningDictionary out = d;
  out.data /= s;
  return out;
}

/// f_E = (D^T D + lambda I)^{-1} D^T t
inline Vector equivalent_filter(const LearningDictionary& d, const Vector& t, double lambda) {
  detail::check_target(d.data, t);
  return landweber_solve(d.data, t, lambda);
}

// ---------------------------------------------------------------------------
// Two cascaded neurons:  x_{k-1} = soft(x_{k-2} * f_{k-2}),  x_k = soft(x_{k-1} * f_{k-1})
// ---------------------------------------------------------------------------

struct CascadePair {
  NeuronFilter inner;  // f_{k-2}, applied to the e x e input
  NeuronFilter outer;  // f_{k-1}, applied to the hidden map
  Index input_size = 0;

  Index hidden_size() const { return input_size - inner.size() + 1; }
  Index output_size() const { return hidden_size() - outer.size() + 1; }

  void validate() const {
    if (inner.size() > input_size || outer.size() > hidden_size())
      throw DimensionError("CascadePair: size chain e -> c -> output is inconsistent");
  }
};

/// P = X(f_{k-1}) D_{L,k-2}: maps the inner filter straight to the cascade's
/// pre-activation output when every neuron is active.
inline Matrix build_modified_dictionary(const NeuronFilter& outer, const LearningDictionary& inner_dict) {
  const Index hidden = inner_dict.source_size - inner_dict.filter_size + 1;
  if (outer.size() > hidden) throw DimensionError("build_modified_dictionary: outer filter exceeds hidden map");
  return correlation_matrix(outer.as_patch(), hidden) * inner_dict.data;
}

struct CascadeForward {
  Vector hidden;  // vec of x_{k-1}
  Vector output;  // vec of x_k
};

inline CascadeForward cascade_forward(const CascadePair& pair, const Patch& input) {
  pair.validate();
  if (input.rows() != pair.input_size || input.cols() != pair.input_size)
    throw DimensionError("cascade_forward: input must be e x e");
  const LearningDictionary d_in = w_operator(input, pair.inner.size());
  CascadeForward out;
  out.hidden = neuron_forward(d_in, pair.inner);
  const Patch hidden = unvectorize_lex(out.hidden, pair.hidden_size(), pair.hidden_size());
  out.output = neuron_forward(w_operator(hidden, pair.outer.size()), pair.outer);
  return out;
}

/// One simultaneous update of both filters. The inner filter moves by
/// P^T (t - x_k); when every neuron is active this is
/// P^T (t - P f + X(f_{k-1}) b_{k-2} + b_{k-1}), and when every output is dead
/// it is P^T t. The outer filter takes a single-neuron step on W(x_{k-1}).
inline CascadePair cascade_step(const CascadePair& pair, const Patch& input, const Vector& t) {
  const CascadeForward fw = cascade_forward(pair, input);
  if (t.size() != fw.output.size()) throw DimensionError("cascade_step: target length must match output");
  const LearningDictionary d_in = w_operator(input, pair.inner.size());
  const Matrix p = build_modified_dictionary(pair.outer, d_in);

  CascadePair next = pair;
  next.inner.coeffs = pair.inner.coeffs + p.transpose() * (t - fw.output);

  const Patch hidden = unvectorize_lex(fw.hidden, pair.hidden_size(), pair.hidden_size());
  const LearningDictionary d_hidden = w_operator(hidden, pair.outer.size());
  next.outer.coeffs = pair.outer.coeffs + d_hidden.data.transpose() * (t - fw.output);
  return next;
}

/// Inner-filter update written as soft_{b'}(f + P^T (t - P f)) with
/// b' = -P^T (P f - x_k).
inline Vector cascade_inner_soft_form(const CascadePair& pair, const Patch& input, const Vector& t) {
  const CascadeForward fw = cascade_forward(pair, input);
  if (t.size() != fw.output.size()) throw DimensionError("cascade_inner_soft_form: target length must match output");
  const Matrix p = build_modified_dictionary(pair.outer, w_operator(input, pair.inner.size()));
  const Vector& f = pair.inner.coeffs;
  const Vector pf = p * f;
  const Vector b_prime = -(p.transpose() * (pf - fw.output));
  return soft_nn(f + p.transpose() * (t - pf), b_prime);
}

// ---------------------------------------------------------------------------
// Reproducible nonnegative test problems
// ---------------------------------------------------------------------------

struct NeuronProblem {
  Patch superpatch;
  LearningDictionary dictionary;  // spectrally scaled W(superpatch)
  NeuronFilter generator;         // filter that produced the target
  Vector target;
  TrainState start;
};

/// Uniform [0,1] superpatch, a realizable target soft_b(D f*) from a filter
/// with entries in [0.5, 1], and a zero starting filter sharing the bias.
inline NeuronProblem random_nonnegative_problem(Index superpatch, Index filter, std::uint64_t seed,
                                                double bias = 0.01) {
  if (filter < 1 || filter > superpatch) throw DimensionError("random_nonnegative_problem: need 1 <= a <= c");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  NeuronProblem p;
  p.superpatch.resize(superpatch, superpatch);
  for (Index i = 0; i < p.superpatch.size(); ++i) p.superpatch.data()[i] = unit(rng);
  p.dictionary = spectrally_scaled(w_operator(p.superpatch, filter));
  p.generator.coeffs.resize(filter * filter);
  for (Index i = 0; i < p.generator.coeffs.size(); ++i) p.generator.coeffs[i] = 0.5 + 0.5 * unit(rng);
  p.generator.bias = bias;
  p.target = neuron_forward(p.dictionary, p.generator);
  p.start.filter.coeffs = Vector::Zero(filter * filter);
  p.start.filter.bias = bias;
  return p;
}

}  // namespace invcnn

#endif  // INVCNN_NEURON_HPP
