#ifndef INVCNN_COMMON_HPP
#define INVCNN_COMMON_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace invcnn {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A 2-D grid of real intensities. Images and patches share this carrier.
using Patch = Matrix;
using GrayImage = Matrix;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a solver is asked to run outside its convergence domain.
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SynthesisFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainingDivergence : std::runtime_error {
  TrainingDivergence(const std::string& what, int epoch_, double loss_)
      : std::runtime_error(what), epoch(epoch_), loss(loss_) {}
  int epoch;
  double loss;
};

namespace detail {

inline void require(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace detail

}  // namespace invcnn

#endif  // INVCNN_COMMON_HPP
