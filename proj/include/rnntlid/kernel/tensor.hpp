#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rnntlid {

#ifdef RNNTLID_FLOAT32
using Real = float;
#else
using Real = double;
#endif

// Row-major dense storage; rows are frames / lattice nodes, columns features.
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using Tensor2 = Matrix;

// T x D matrix of frame features.
using AcousticSequence = Matrix;

// Raised when a caller violates an operation's preconditions.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace rnntlid
