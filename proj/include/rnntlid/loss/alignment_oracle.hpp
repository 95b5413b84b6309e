#pragma once

#include <span>
#include <vector>

#include "rnntlid/model/transducer.hpp"

namespace rnntlid {

// One monotonic path through the lattice: the emitted symbol sequence,
// T blanks and U labels interleaved, always ending in blank.
using AlignmentPath = std::vector<TokenId>;

inline constexpr double kMaxEnumeratedAlignments = 1e6;

// Number of paths, C(T - 1 + U, U).
double count_alignments(int frames, int labels);

// Brute-force enumeration of every path. Throws when more than
// kMaxEnumeratedAlignments paths would be produced.
std::vector<AlignmentPath> enumerate_alignments(std::span<const TokenId> targets, int frames);

// log P(path) from the logits, with its own softmax evaluation.
double alignment_log_prob(const LogitsLattice& logits, std::span<const TokenId> targets, const AlignmentPath& path);

// -log sum over all enumerated paths.
double enumeration_loss(const LogitsLattice& logits, std::span<const TokenId> targets);

}  // namespace rnntlid
