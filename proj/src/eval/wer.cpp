#include "rnntlid/eval/wer.hpp"

#include <utility>
#include <vector>

#include "rnntlid/kernel/tensor.hpp"

namespace rnntlid {

WerResult wer(const Vocab& vocab, std::span<const TokenId> ref, std::span<const TokenId> hyp) {
  for (TokenId y : ref) require(!vocab.is_tag(y), "reference contains a language tag; strip before scoring");
  for (TokenId y : hyp) require(!vocab.is_tag(y), "hypothesis contains a language tag; strip before scoring");

  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  // (edits, insertions + deletions), compared lexicographically.
  using Cost = std::pair<int, int>;
  std::vector<std::vector<Cost>> d(n + 1, std::vector<Cost>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = {static_cast<int>(i), static_cast<int>(i)};
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = {static_cast<int>(j), static_cast<int>(j)};
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const int mismatch = ref[i - 1] == hyp[j - 1] ? 0 : 1;
      Cost diag{d[i - 1][j - 1].first + mismatch, d[i - 1][j - 1].second};
      Cost del{d[i - 1][j].first + 1, d[i - 1][j].second + 1};
      Cost ins{d[i][j - 1].first + 1, d[i][j - 1].second + 1};
      d[i][j] = std::min({diag, del, ins});
    }
  }

  WerResult r;
  r.reference_length = static_cast<int>(n);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const int mismatch = ref[i - 1] == hyp[j - 1] ? 0 : 1;
      const Cost diag{d[i - 1][j - 1].first + mismatch, d[i - 1][j - 1].second};
      if (diag == d[i][j]) {
        r.substitutions += mismatch;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && Cost{d[i - 1][j].first + 1, d[i - 1][j].second + 1} == d[i][j]) {
      ++r.deletions;
      --i;
    } else {
      ++r.insertions;
      --j;
    }
  }
  if (n == 0)
    r.wer = m == 0 ? 0.0 : 1.0;
  else
    r.wer = static_cast<double>(r.errors()) / static_cast<double>(n);
  return r;
}

}  // namespace rnntlid
