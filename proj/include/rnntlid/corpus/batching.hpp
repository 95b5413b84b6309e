#pragma once

#include <cstdint>
#include <vector>

#include "rnntlid/corpus/synth.hpp"

namespace rnntlid {

// Endless stream of index batches whose per-language counts follow the
// corpus proportions (largest-remainder rounding of batch_size * p_l).
// Each language's stratum is visited in a seeded shuffled order and
// reshuffled when exhausted.
class StratifiedSampler {
 public:
  StratifiedSampler(const Corpus& corpus, int batch_size, std::uint64_t seed);

  std::vector<std::size_t> next_batch();
  const std::vector<int>& per_batch_counts() const { return counts_; }

 private:
  Rng rng_;
  std::vector<std::vector<std::size_t>> strata_;
  std::vector<std::size_t> cursor_;
  std::vector<int> counts_;
};

std::vector<std::vector<std::size_t>> stratified_batches(const Corpus& corpus, int batch_size, std::uint64_t seed,
                                                         int n_batches);

}  // namespace rnntlid
