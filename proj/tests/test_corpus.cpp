#include <algorithm>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "rnntlid/corpus/batching.hpp"
#include "rnntlid/corpus/corpus_io.hpp"
#include "rnntlid/corpus/synth.hpp"

using namespace rnntlid;

namespace {

CorpusSplits small_corpus(LexiconConfig lc = {}, CorpusManifest m = {}) {
  m.train_size = 300;
  m.test_size = 60;
  return generate_corpus(build_lexicon(lc), m);
}

bool same_corpus(const Corpus& a, const Corpus& b) {
  if (a.size() != b.size() || !(a.vocab == b.vocab)) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.utterances[i];
    const auto& y = b.utterances[i];
    if (x.id != y.id || x.language != y.language || x.audio != y.audio || x.asr_targets != y.asr_targets ||
        x.joint_targets != y.joint_targets)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("regeneration is bit identical") {
  const auto a = small_corpus();
  const auto b = small_corpus();
  CHECK(same_corpus(a.train, b.train));
  CHECK(same_corpus(a.test, b.test));
  CorpusManifest other;
  other.seed = 12;
  CHECK_FALSE(same_corpus(a.train, small_corpus({}, other).train));
}

TEST_CASE("joint targets end with the single language tag") {
  const auto c = small_corpus().train;
  for (const auto& u : c.utterances) {
    REQUIRE(u.joint_targets.size() == u.asr_targets.size() + 1);
    CHECK(std::equal(u.asr_targets.begin(), u.asr_targets.end(), u.joint_targets.begin()));
    CHECK(u.joint_targets.back() == c.vocab.tag_for_language(u.language));
    for (TokenId t : u.asr_targets) CHECK_FALSE(c.vocab.is_tag(t));
    int frames = 0;
    for (int f : u.token_frames) frames += f;
    CHECK(frames == u.frames());
  }
}

TEST_CASE("no code switching keeps tokens in their own inventory") {
  CorpusManifest m;
  m.code_switch_rate = 0.0;
  LexiconConfig lc;
  const auto lexicon = build_lexicon(lc);
  const auto c = small_corpus(lc, m).train;
  for (const auto& u : c.utterances) {
    const auto& own = lexicon.languages[static_cast<std::size_t>(u.language)].exclusive;
    for (TokenId t : u.asr_targets) {
      if (t == c.wake_token) continue;
      CHECK(std::find(own.begin(), own.end(), t) != own.end());
    }
  }
}

TEST_CASE("code switching draws from the shared lexicon") {
  CorpusManifest m;
  m.code_switch_rate = 0.5;
  LexiconConfig lc;
  const auto lexicon = build_lexicon(lc);
  const auto& shared = lexicon.languages[0].shared;
  int switched = 0;
  for (const auto& u : small_corpus(lc, m).train.utterances)
    for (TokenId t : u.asr_targets) switched += std::find(shared.begin(), shared.end(), t) != shared.end();
  CHECK(switched > 100);
}

TEST_CASE("zero noise gives prototype frames") {
  LexiconConfig lc;
  lc.noise_sigma = 0.0;
  CorpusManifest m;
  m.wake_prefix_rate = 0.0;
  const auto lexicon = build_lexicon(lc);
  const auto c = small_corpus(lc, m).train;
  for (const auto& u : c.utterances) {
    int frame = 0;
    for (std::size_t k = 0; k < u.asr_targets.size(); ++k) {
      const Vector mean = lexicon.acoustic_mean(u.language, u.asr_targets[k]);
      for (int f = 0; f < u.token_frames[k]; ++f, ++frame) CHECK(u.audio.row(frame).transpose() == mean);
    }
  }
}

TEST_CASE("inventories must not overlap") {
  auto lexicon = build_lexicon({});
  lexicon.languages[1].exclusive[0] = lexicon.languages[0].exclusive[0];
  CHECK_THROWS_AS(lexicon.validate(), ContractError);
}

TEST_CASE("language means are separable by nearest prototype") {
  LexiconConfig lc;
  CorpusManifest m;
  m.code_switch_rate = 0.0;
  const auto lexicon = build_lexicon(lc);
  const auto splits = generate_corpus(lexicon, m);
  // Class means from training data, nearest-mean classification of test
  // utterance mean frames.
  std::vector<Vector> means(2, Vector::Zero(lc.feature_dim));
  std::vector<int> counts(2, 0);
  for (const auto& u : splits.train.utterances) {
    means[static_cast<std::size_t>(u.language)] += u.audio.colwise().mean().transpose();
    ++counts[static_cast<std::size_t>(u.language)];
  }
  for (int l = 0; l < 2; ++l) means[static_cast<std::size_t>(l)] /= counts[static_cast<std::size_t>(l)];
  int correct = 0;
  for (const auto& u : splits.test.utterances) {
    const Vector x = u.audio.colwise().mean().transpose();
    const int guess = (x - means[0]).norm() <= (x - means[1]).norm() ? 0 : 1;
    correct += guess == u.language;
  }
  CHECK(correct >= 0.99 * splits.test.size());
}

TEST_CASE("largest remainder rounding") {
  CHECK(largest_remainder({0.75, 0.25}, 8) == std::vector<int>{6, 2});
  CHECK(largest_remainder({0.5, 0.5}, 3) == std::vector<int>{2, 1});
  CHECK(largest_remainder({1, 1, 1}, 10) == std::vector<int>{4, 3, 3});
}

TEST_CASE("stratified batches follow corpus proportions") {
  CorpusManifest m;
  m.language_proportions = {0.75, 0.25};
  const auto c = small_corpus({}, m).train;
  StratifiedSampler sampler(c, 8, 3);
  CHECK(sampler.per_batch_counts() == std::vector<int>{6, 2});
  for (int b = 0; b < 20; ++b) {
    int first = 0;
    for (auto i : sampler.next_batch()) first += c.utterances[i].language == 0;
    CHECK(first == 6);
  }
  CHECK(stratified_batches(c, 8, 5, 10) == stratified_batches(c, 8, 5, 10));
  CHECK_FALSE(stratified_batches(c, 8, 5, 10) == stratified_batches(c, 8, 6, 10));
  CHECK_THROWS_AS(StratifiedSampler(c, 1, 3), ContractError);
  const auto whole = stratified_batches(c, static_cast<int>(c.size()), 1, 1).front();
  CHECK(std::set<std::size_t>(whole.begin(), whole.end()).size() == c.size());
}

TEST_CASE("frequency masks") {
  Rng rng(1);
  const Matrix audio = Matrix::Constant(10, 64, 1.0);
  CHECK(freq_mask(audio, 2, 0, rng) == audio);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix masked = freq_mask(audio, 2, 24, rng);
    int zero_channels = 0;
    for (Eigen::Index c = 0; c < 64; ++c) {
      const bool zero_any = (masked.col(c).array() == 0).any();
      if (zero_any) {
        CHECK(masked.col(c).isZero(0.0));
        ++zero_channels;
      } else {
        CHECK(masked.col(c) == audio.col(c));
      }
    }
    CHECK(zero_channels <= 48);
  }
  CHECK_THROWS_AS(freq_mask(audio, 1, 65, rng), ContractError);
}

TEST_CASE("wake-only filtering") {
  CorpusManifest m;
  m.wake_only_fraction = 0.1;
  const auto c = small_corpus({}, m).train;
  const auto wake_only = std::count_if(c.utterances.begin(), c.utterances.end(),
                                       [&](const Utterance& u) { return c.is_wake_only(u); });
  CHECK(wake_only == 30);
  const auto filtered = filter_wake_word_only(c);
  CHECK(filtered.size() == c.size() - 30);
  for (const auto& u : filtered.utterances) CHECK_FALSE(filtered.is_wake_only(u));
  CHECK(filter_wake_word_only(filtered).size() == filtered.size());
  Corpus all = c;
  all.utterances.clear();
  for (const auto& u : c.utterances)
    if (c.is_wake_only(u)) all.utterances.push_back(u);
  CHECK(filter_wake_word_only(all).empty());
}

TEST_CASE("corpus files round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "rnntlid_corpus_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto c = small_corpus();
  write_corpus_manifest(dir, KvDocument{}, c.train);
  write_split(dir / "train.utts", c.train);
  const Corpus back = read_corpus(dir, "train");
  CHECK(back.vocab == c.train.vocab);
  CHECK(back.wake_token == c.train.wake_token);
  REQUIRE(back.size() == c.train.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back.utterances[i].asr_targets == c.train.utterances[i].asr_targets);
    CHECK(back.utterances[i].joint_targets == c.train.utterances[i].joint_targets);
    CHECK((back.utterances[i].audio - c.train.utterances[i].audio).cwiseAbs().maxCoeff() < 1e-5);
  }
  std::filesystem::remove_all(dir);
}
