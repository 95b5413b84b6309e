#pragma once

#include <span>

#include "rnntlid/model/vocab.hpp"

namespace rnntlid {

struct WerResult {
  double wer = 0.0;
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  int reference_length = 0;

  int errors() const { return substitutions + deletions + insertions; }
};

// Unit-cost Levenshtein alignment. Among minimum-cost alignments the one with
// the most substitutions (fewest insert/delete pairs) is reported. Both
// sequences must already be free of language tags. An empty reference gives
// WER 0 against an empty hypothesis and 1 otherwise.
WerResult wer(const Vocab& vocab, std::span<const TokenId> reference, std::span<const TokenId> hypothesis);

}  // namespace rnntlid
