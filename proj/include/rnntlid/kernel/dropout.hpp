#pragma once

#include "rnntlid/kernel/rng.hpp"
#include "rnntlid/kernel/tensor.hpp"

namespace rnntlid {

// Inverted dropout: kept units are scaled by 1/(1-rate) so inference needs
// no rescaling. A rate of 0 yields an all-ones mask.
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng);

}  // namespace rnntlid
