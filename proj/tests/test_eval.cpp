#include <algorithm>

#include "doctest.h"
#include "rnntlid/eval/scoring.hpp"
#include "rnntlid/eval/wer.hpp"
#include "rnntlid/kernel/rng.hpp"

using namespace rnntlid;

namespace {
const Vocab kVocab({"a", "b", "c", "d"}, {"<x>", "<y>"});
}

TEST_CASE("wer cases") {
  const std::vector<TokenId> abc = {1, 2, 3};
  CHECK(wer(kVocab, abc, abc).wer == 0.0);
  const std::vector<TokenId> ab = {1, 2}, a = {1};
  const auto r = wer(kVocab, ab, a);
  CHECK(r.wer == 0.5);
  CHECK(r.deletions == 1);
  const std::vector<TokenId> tagged = {1, 2, kVocab.tag_for_language(0)};
  CHECK_THROWS_AS(wer(kVocab, ab, tagged), ContractError);
  CHECK_THROWS_AS(wer(kVocab, tagged, ab), ContractError);
}

TEST_CASE("wer prefers substitutions and reports components") {
  const std::vector<TokenId> ref = {1, 2, 3}, hyp = {1, 4, 3};
  const auto r = wer(kVocab, ref, hyp);
  CHECK(r.substitutions == 1);
  CHECK(r.deletions == 0);
  CHECK(r.insertions == 0);
  const std::vector<TokenId> longer = {1, 2, 3, 4, 4};
  const auto ins = wer(kVocab, ref, longer);
  CHECK(ins.insertions == 2);
  CHECK(ins.wer == doctest::Approx(2.0 / 3));
}

TEST_CASE("wer symmetry sanity") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TokenId> x;
    const int n = static_cast<int>(rng.uniform_int(1, 8));
    for (int i = 0; i < n; ++i) x.push_back(static_cast<TokenId>(rng.uniform_int(1, 4)));
    CHECK(wer(kVocab, x, x).wer == 0.0);
    const auto empty = wer(kVocab, x, {});
    CHECK(empty.wer == 1.0);
    CHECK(empty.deletions == n);
  }
  CHECK(wer(kVocab, {}, {}).wer == 0.0);
}

TEST_CASE("lid accuracy per language") {
  std::vector<DecodeRecord> results = {{"u1", {}, {}, 0, {}}, {"u2", {}, {}, 1, {}}, {"u3", {}, {}, 0, {}}};
  std::map<std::string, int> truths = {{"u1", 0}, {"u2", 1}, {"u3", 1}};
  const auto acc = lid_accuracy(results, truths, 3);
  REQUIRE(acc.size() == 3);
  CHECK(*acc[0] == 1.0);
  CHECK(*acc[1] == 0.5);
  CHECK_FALSE(acc[2].has_value());
  truths.erase("u3");
  truths["u4"] = 0;
  CHECK_THROWS_AS(lid_accuracy(results, truths, 3), ContractError);
}

TEST_CASE("lid accuracy from stored posteriors matches") {
  std::vector<DecodeRecord> results;
  std::map<std::string, int> truths;
  Rng rng(2);
  for (int i = 0; i < 40; ++i) {
    DecodeRecord r;
    r.id = "u" + std::to_string(i);
    const double p = rng.uniform();
    r.final_posteriors = {p, 1 - p};
    r.predicted_language = p >= 0.5 ? 0 : 1;
    truths[r.id] = i % 2;
    results.push_back(r);
  }
  auto recomputed = results;
  for (auto& r : recomputed) {
    r.predicted_language = static_cast<int>(
        std::max_element(r.final_posteriors.begin(), r.final_posteriors.end()) - r.final_posteriors.begin());
  }
  CHECK(lid_accuracy(results, truths, 2) == lid_accuracy(recomputed, truths, 2));
}

TEST_CASE("relative werr orientation") {
  CHECK(*relative_werr(0.2, 0.2) == 0.0);
  CHECK(*relative_werr(0.2, 0.1) == doctest::Approx(50.0));
  CHECK(*relative_werr(0.2, 0.3) == doctest::Approx(-50.0));
  CHECK_FALSE(relative_werr(0.0, 0.1).has_value());
  CHECK(*relative_werr(0.0, 0.0) == 0.0);
}
