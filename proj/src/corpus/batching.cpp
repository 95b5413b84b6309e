#include "rnntlid/corpus/batching.hpp"

namespace rnntlid {

StratifiedSampler::StratifiedSampler(const Corpus& corpus, int batch_size, std::uint64_t seed) : rng_(seed) {
  require(!corpus.empty(), "cannot batch an empty corpus");
  require(batch_size >= corpus.n_languages(), "batch_size must be at least the number of languages");
  strata_.resize(static_cast<std::size_t>(corpus.n_languages()));
  for (std::size_t i = 0; i < corpus.size(); ++i)
    strata_[static_cast<std::size_t>(corpus.utterances[i].language)].push_back(i);
  std::vector<double> weights;
  for (auto& s : strata_) {
    weights.push_back(static_cast<double>(s.size()));
    rng_.shuffle(s);
  }
  counts_ = largest_remainder(weights, batch_size);
  cursor_.assign(strata_.size(), 0);
}

std::vector<std::size_t> StratifiedSampler::next_batch() {
  std::vector<std::size_t> batch;
  for (std::size_t l = 0; l < strata_.size(); ++l) {
    auto& stratum = strata_[l];
    for (int k = 0; k < counts_[l]; ++k) {
      if (cursor_[l] == stratum.size()) {
        rng_.shuffle(stratum);
        cursor_[l] = 0;
      }
      batch.push_back(stratum[cursor_[l]++]);
    }
  }
  return batch;
}

std::vector<std::vector<std::size_t>> stratified_batches(const Corpus& corpus, int batch_size, std::uint64_t seed,
                                                         int n_batches) {
  StratifiedSampler sampler(corpus, batch_size, seed);
  std::vector<std::vector<std::size_t>> batches;
  for (int b = 0; b < n_batches; ++b) batches.push_back(sampler.next_batch());
  return batches;
}

}  // namespace rnntlid
