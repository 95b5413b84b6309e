#include "rnntlid/loss/alignment_oracle.hpp"

#include <cmath>
#include <functional>

namespace rnntlid {

double count_alignments(int frames, int labels) {
  // C(n, k) with n = T - 1 + U, k = U, accumulated in floating point.
  double count = 1.0;
  const int n = frames - 1 + labels;
  for (int i = 1; i <= labels; ++i) count = count * (n - labels + i) / i;
  return count;
}

std::vector<AlignmentPath> enumerate_alignments(std::span<const TokenId> targets, int frames) {
  require(frames >= 1, "alignment enumeration needs T >= 1");
  const int labels = static_cast<int>(targets.size());
  require(count_alignments(frames, labels) <= kMaxEnumeratedAlignments,
          "alignment enumeration guard exceeded (more than 1e6 paths)");

  std::vector<AlignmentPath> paths;
  AlignmentPath current;
  // Place the first T - 1 blanks and all labels in every order; the final
  // blank is fixed.
  std::function<void(int, int)> walk = [&](int blanks_left, int u) {
    if (blanks_left == 0 && u == labels) {
      AlignmentPath p = current;
      p.push_back(kBlank);
      paths.push_back(std::move(p));
      return;
    }
    if (u < labels) {
      current.push_back(targets[static_cast<std::size_t>(u)]);
      walk(blanks_left, u + 1);
      current.pop_back();
    }
    if (blanks_left > 0) {
      current.push_back(kBlank);
      walk(blanks_left - 1, u);
      current.pop_back();
    }
  };
  walk(frames - 1, 0);
  return paths;
}

double alignment_log_prob(const LogitsLattice& logits, std::span<const TokenId> targets, const AlignmentPath& path) {
  int t = 0;
  int u = 0;
  double total = 0.0;
  for (TokenId symbol : path) {
    require(t < logits.frames, "alignment path runs past the last frame");
    const auto row = logits.row(t, u);
    double norm = 0.0;
    for (Eigen::Index k = 0; k < row.size(); ++k) norm += std::exp(static_cast<double>(row(k)));
    total += static_cast<double>(row(symbol)) - std::log(norm);
    if (symbol == kBlank) {
      ++t;
    } else {
      require(u < static_cast<int>(targets.size()) && targets[static_cast<std::size_t>(u)] == symbol,
              "alignment path emits a label out of order");
      ++u;
    }
  }
  require(t == logits.frames && u == static_cast<int>(targets.size()), "alignment path does not terminate at (T, U)");
  return total;
}

double enumeration_loss(const LogitsLattice& logits, std::span<const TokenId> targets) {
  const auto paths = enumerate_alignments(targets, logits.frames);
  double total = 0.0;
  for (const auto& p : paths) total += std::exp(alignment_log_prob(logits, targets, p));
  return -std::log(total);
}

}  // namespace rnntlid
