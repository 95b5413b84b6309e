#pragma once

#include <climits>
#include <span>

#include "rnntlid/model/transducer.hpp"

namespace rnntlid {

// Stand-in for log(0) in lattice tables. It is finite so sums stay finite,
// and exp(kLogZero - x) underflows to exactly 0 for any reachable x.
inline constexpr double kLogZero = -1e30;

// Forward/backward tables over the alignment lattice, t in [0, T], u in [0, U].
// Rows t < T are emitting nodes. Row T holds the state after the terminating
// blank: alpha(T, u) = alpha(T-1, u) + log P(blank | T-1, u), and only (T, U)
// is a valid end, so beta(T, U) = 0 and beta(T, u < U) = kLogZero.
//
// A path starts at (0, 0); from (t, u) a blank moves to (t+1, u) and the next
// target label moves to (t, u+1). Every path ends with the blank out of
// (T-1, U).
struct AlignmentLattice {
  int frames = 0;
  int labels = 0;
  Eigen::MatrixXd log_probs;  // T(U+1) x V log-softmax rows, lattice node order
  Eigen::MatrixXd alpha;      // (T+1) x (U+1)
  Eigen::MatrixXd beta;       // (T+1) x (U+1)
  double log_likelihood = 0.0;

  double log_prob(int t, int u, TokenId k) const {
    return log_probs(static_cast<Eigen::Index>(t) * (labels + 1) + u, k);
  }
};

struct TransducerLossOptions {
  // Multiplies the log-probability of every language-tag label transition.
  // 1 is the plain likelihood.
  double tag_weight = 1.0;
  TokenId first_tag = INT_MAX;
};

struct TransducerLossResult {
  double loss = 0.0;  // -log P(targets | audio)
  AlignmentLattice lattice;
};

TransducerLossResult transducer_loss(const LogitsLattice& logits, std::span<const TokenId> targets,
                                     const TransducerLossOptions& options = {});

// dL/dz for every node:
//
//   dL/dz_{t,u,k} = p_k(t,u) * S(t,u) - c_k * xi(t,u,k)
//
// where xi(t,u,k) is the posterior probability that the path leaves (t,u)
// with symbol k (blank, or the next target label), c_k is the transition's
// weight (tag_weight for language tags, else 1), and S(t,u) = sum_k c_k xi.
// With unit weights S is the node occupancy gamma(t,u) = exp(alpha + beta - log Z).
Matrix loss_grad_logits(const AlignmentLattice& lattice, const LogitsLattice& logits,
                        std::span<const TokenId> targets, const TransducerLossOptions& options = {});

}  // namespace rnntlid
