#include "rnntlid/kernel/dropout.hpp"

namespace rnntlid {

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  require(rate >= 0.0 && rate < 1.0, "dropout rate must lie in [0, 1)");
  Matrix mask = Matrix::Ones(rows, cols);
  if (rate == 0.0) return mask;
  const Real keep_scale = static_cast<Real>(1.0 / (1.0 - rate));
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      mask(r, c) = rng.uniform() < rate ? Real(0) : keep_scale;
  return mask;
}

}  // namespace rnntlid
