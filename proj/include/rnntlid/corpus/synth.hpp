#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rnntlid/model/vocab.hpp"
#include "rnntlid/kernel/rng.hpp"
#include "rnntlid/kernel/tensor.hpp"

namespace rnntlid {

// Knobs for the symbolic lexicon and its acoustics.
struct LexiconConfig {
  std::vector<std::string> languages = {"en", "es"};
  int exclusive_tokens = 20;     // per language
  int shared_tokens = 4;         // code-switch lexicon, common to all languages
  int feature_dim = 16;
  double language_offset = 2.0;  // per-channel magnitude of the language mean offset
  double noise_sigma = 0.5;
  double prototype_scale = 1.0;  // std-dev of token prototype entries
  double min_prototype_distance = 1.0;
  int min_frames_per_token = 4;
  int max_frames_per_token = 6;
  int min_tokens = 4;
  int max_tokens = 9;
  // Leading exclusive tokens of language 1 given near copies of language 0's
  // prototypes: one concept, two symbols.
  int dual_script_pairs = 0;
  double dual_script_jitter = 0.05;
  std::uint64_t seed = 7;
};

struct SyntheticLanguageSpec {
  int language = 0;
  std::string name;
  std::vector<TokenId> exclusive;  // this language only
  std::vector<TokenId> shared;     // also in every other language
  Vector offset;
  double noise_sigma = 0.0;
  int min_frames = 1;
  int max_frames = 1;
};

// Vocabulary, per-language inventories and per-token prototypes. A frame of
// token k spoken in language l is prototype(k) + offset(l) + sigma * N(0, I).
struct SyntheticLexicon {
  Vocab vocab;  // includes one tag per language
  std::vector<SyntheticLanguageSpec> languages;
  std::vector<Vector> prototypes;  // indexed by token id; blank and tags empty
  TokenId wake_token = kBlank;
  int feature_dim = 0;
  int min_tokens = 1;  // per utterance, excluding a wake prefix
  int max_tokens = 1;

  int n_languages() const { return static_cast<int>(languages.size()); }
  Vector acoustic_mean(int language, TokenId token) const;
  // Throws when exclusive inventories overlap each other or the shared set,
  // or when two prototypes coincide.
  void validate() const;
};

SyntheticLexicon build_lexicon(const LexiconConfig& config);

struct CorpusManifest {
  int train_size = 2000;
  int test_size = 500;
  std::vector<double> language_proportions = {0.5, 0.5};
  double code_switch_rate = 0.1;
  double wake_only_fraction = 0.05;
  double wake_prefix_rate = 0.2;
  std::uint64_t seed = 11;
};

struct Utterance {
  std::string id;
  int language = 0;
  Matrix audio;                       // T x feature_dim
  std::vector<TokenId> asr_targets;
  std::vector<TokenId> joint_targets;  // asr_targets followed by the language tag
  std::vector<int> token_frames;       // frames spent on each asr target

  int frames() const { return static_cast<int>(audio.rows()); }
};

struct Corpus {
  Vocab vocab;
  std::vector<std::string> language_names;
  TokenId wake_token = kBlank;
  std::vector<Utterance> utterances;

  int n_languages() const { return static_cast<int>(language_names.size()); }
  std::size_t size() const { return utterances.size(); }
  bool empty() const { return utterances.empty(); }
  std::vector<std::size_t> language_counts() const;
  bool is_wake_only(const Utterance& u) const {
    return u.asr_targets.size() == 1 && u.asr_targets.front() == wake_token;
  }
};

struct CorpusSplits {
  Corpus train;
  Corpus test;
};

// Deterministic in (lexicon, manifest).
CorpusSplits generate_corpus(const SyntheticLexicon& lexicon, const CorpusManifest& manifest);
Corpus generate_split(const SyntheticLexicon& lexicon, const CorpusManifest& manifest, int size,
                      const std::string& prefix, std::uint64_t seed);

// Drops utterances whose transcript is only the wake token.
Corpus filter_wake_word_only(const Corpus& corpus);
// Keeps utterances of one language.
Corpus select_language(const Corpus& corpus, int language);

// Zeroes `n_masks` contiguous channel bands of width uniform in [0, max_width].
Matrix freq_mask(const Matrix& audio, int n_masks, int max_width, Rng& rng);

// Integer counts summing to `total` that follow `weights`, by largest
// remainder; ties go to the lower index.
std::vector<int> largest_remainder(const std::vector<double>& weights, int total);

}  // namespace rnntlid
