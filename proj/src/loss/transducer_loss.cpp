#include "rnntlid/loss/transducer_loss.hpp"

#include <cmath>

#include "rnntlid/kernel/activations.hpp"

namespace rnntlid {

namespace {

double lae(double a, double b) {
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  if (lo <= kLogZero) return std::max(hi, kLogZero);
  return hi + std::log1p(std::exp(lo - hi));
}

void check_targets(const LogitsLattice& logits, std::span<const TokenId> targets) {
  require(logits.frames >= 1, "transducer loss needs T >= 1");
  require(static_cast<int>(targets.size()) == logits.labels, "target length does not match the logits lattice");
  for (TokenId y : targets) {
    require(y != kBlank, "targets may not contain blank");
    require(y > 0 && y < logits.vocab, "target id outside vocab");
  }
}

double weight_of(TokenId k, const TransducerLossOptions& options) {
  return k >= options.first_tag ? options.tag_weight : 1.0;
}

}  // namespace

TransducerLossResult transducer_loss(const LogitsLattice& logits, std::span<const TokenId> targets,
                                     const TransducerLossOptions& options) {
  check_targets(logits, targets);
  require(logits.data.allFinite(), "transducer loss received non-finite logits");
  const int T = logits.frames;
  const int U = logits.labels;

  TransducerLossResult result;
  AlignmentLattice& lat = result.lattice;
  lat.frames = T;
  lat.labels = U;
  lat.log_probs.resize(logits.data.rows(), logits.data.cols());
  for (Eigen::Index n = 0; n < logits.data.rows(); ++n)
    lat.log_probs.row(n) = log_softmax(logits.data.row(n).transpose()).cast<double>().transpose();

  auto blank = [&](int t, int u) { return lat.log_prob(t, u, kBlank); };
  auto label = [&](int t, int u) {
    const TokenId y = targets[static_cast<std::size_t>(u)];
    return weight_of(y, options) * lat.log_prob(t, u, y);
  };

  lat.alpha = Eigen::MatrixXd::Constant(T + 1, U + 1, kLogZero);
  lat.alpha(0, 0) = 0.0;
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      if (t == 0 && u == 0) continue;
      const double from_blank = t > 0 ? lat.alpha(t - 1, u) + blank(t - 1, u) : kLogZero;
      const double from_label = u > 0 ? lat.alpha(t, u - 1) + label(t, u - 1) : kLogZero;
      lat.alpha(t, u) = lae(from_blank, from_label);
    }
  }
  for (int u = 0; u <= U; ++u) lat.alpha(T, u) = lat.alpha(T - 1, u) + blank(T - 1, u);

  lat.beta = Eigen::MatrixXd::Constant(T + 1, U + 1, kLogZero);
  lat.beta(T, U) = 0.0;
  for (int t = T - 1; t >= 0; --t) {
    for (int u = U; u >= 0; --u) {
      const double via_blank = blank(t, u) + lat.beta(t + 1, u);
      const double via_label = u < U ? label(t, u) + lat.beta(t, u + 1) : kLogZero;
      lat.beta(t, u) = lae(via_blank, via_label);
    }
  }

  lat.log_likelihood = lat.alpha(T, U);
  result.loss = -lat.log_likelihood;
  return result;
}

Matrix loss_grad_logits(const AlignmentLattice& lat, const LogitsLattice& logits, std::span<const TokenId> targets,
                        const TransducerLossOptions& options) {
  check_targets(logits, targets);
  require(lat.frames == logits.frames && lat.labels == logits.labels &&
              lat.log_probs.rows() == logits.data.rows() && lat.log_probs.cols() == logits.data.cols(),
          "alignment lattice does not match the logits (stale lattice)");
  const int T = lat.frames;
  const int U = lat.labels;
  const double log_z = lat.log_likelihood;

  Matrix grad(logits.data.rows(), logits.data.cols());
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      const Eigen::Index n = logits.node(t, u);
      const double a = lat.alpha(t, u);
      const double xi_blank = std::exp(a + lat.log_prob(t, u, kBlank) + lat.beta(t + 1, u) - log_z);
      double xi_label = 0.0;
      double c_label = 1.0;
      TokenId y = kBlank;
      if (u < U) {
        y = targets[static_cast<std::size_t>(u)];
        c_label = weight_of(y, options);
        xi_label = std::exp(a + c_label * lat.log_prob(t, u, y) + lat.beta(t, u + 1) - log_z);
      }
      const double occupancy = xi_blank + c_label * xi_label;
      for (Eigen::Index k = 0; k < grad.cols(); ++k)
        grad(n, k) = static_cast<Real>(std::exp(lat.log_probs(n, k)) * occupancy);
      grad(n, kBlank) -= static_cast<Real>(xi_blank);
      if (u < U) grad(n, y) -= static_cast<Real>(c_label * xi_label);
    }
  }
  return grad;
}

}  // namespace rnntlid
