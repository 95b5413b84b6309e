#include "rnntlid/corpus/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace rnntlid {

namespace {

Vector random_vector(int dim, double scale, Rng& rng) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = static_cast<Real>(scale * rng.normal());
  return v;
}

Vector random_signs(int dim, Rng& rng) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.bernoulli(0.5) ? Real(1) : Real(-1);
  return v;
}

std::string token_name(const std::string& prefix, int k) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "_%02d", k);
  return prefix + buf;
}

}  // namespace

Vector SyntheticLexicon::acoustic_mean(int language, TokenId token) const {
  require(language >= 0 && language < n_languages(), "language out of range");
  require(vocab.is_asr(token), "acoustic mean requested for a non-ASR token");
  return prototypes[static_cast<std::size_t>(token)] + languages[static_cast<std::size_t>(language)].offset;
}

void SyntheticLexicon::validate() const {
  require(n_languages() >= 2, "a bilingual corpus needs at least 2 languages");
  std::set<TokenId> shared(languages.front().shared.begin(), languages.front().shared.end());
  std::set<TokenId> claimed;
  for (const auto& spec : languages) {
    require(std::set<TokenId>(spec.shared.begin(), spec.shared.end()) == shared,
            "shared lexicon must belong to every language's inventory");
    for (TokenId id : spec.exclusive) {
      require(vocab.is_asr(id), "inventory token outside the ASR vocab");
      require(shared.count(id) == 0, "exclusive token " + vocab.symbol(id) + " is also in the shared lexicon");
      require(claimed.insert(id).second, "exclusive inventories overlap at " + vocab.symbol(id));
    }
    require(spec.min_frames >= 1 && spec.max_frames >= spec.min_frames, "bad frames-per-token range");
    require(spec.offset.size() == feature_dim, "language offset dimension mismatch");
  }
  for (const auto& spec : languages) {
    std::vector<TokenId> inventory = spec.exclusive;
    inventory.insert(inventory.end(), spec.shared.begin(), spec.shared.end());
    if (wake_token != kBlank) inventory.push_back(wake_token);
    for (std::size_t a = 0; a < inventory.size(); ++a)
      for (std::size_t b = a + 1; b < inventory.size(); ++b)
        require(prototypes[static_cast<std::size_t>(inventory[a])] != prototypes[static_cast<std::size_t>(inventory[b])],
                "two tokens of language " + spec.name + " share a prototype");
  }
}

SyntheticLexicon build_lexicon(const LexiconConfig& config) {
  const int n_lang = static_cast<int>(config.languages.size());
  require(n_lang >= 2, "a bilingual corpus needs at least 2 languages");
  require(config.exclusive_tokens >= 2, "each language needs at least 2 exclusive tokens");
  require(config.shared_tokens >= 0, "shared_tokens must be non-negative");
  require(config.feature_dim >= 1, "feature_dim must be positive");
  require(config.min_tokens >= 1 && config.max_tokens >= config.min_tokens, "bad tokens-per-utterance range");
  require(config.dual_script_pairs >= 0 && config.dual_script_pairs <= config.exclusive_tokens,
          "dual_script_pairs exceeds the exclusive inventory");

  std::vector<std::string> asr;
  for (const auto& name : config.languages)
    for (int k = 0; k < config.exclusive_tokens; ++k) asr.push_back(token_name(name, k));
  for (int k = 0; k < config.shared_tokens; ++k) asr.push_back(token_name("sh", k));
  asr.push_back("wake");
  std::vector<std::string> tags;
  for (const auto& name : config.languages) tags.push_back("<" + name + ">");

  SyntheticLexicon lex;
  lex.vocab = Vocab(asr, tags);
  lex.feature_dim = config.feature_dim;
  lex.min_tokens = config.min_tokens;
  lex.max_tokens = config.max_tokens;
  lex.wake_token = static_cast<TokenId>(asr.size());

  Rng rng(config.seed);
  lex.prototypes.assign(static_cast<std::size_t>(lex.vocab.size()), Vector());
  for (TokenId id = 1; id <= lex.vocab.n_asr(); ++id) {
    for (int attempt = 0;; ++attempt) {
      require(attempt < 10000, "cannot place prototypes min_prototype_distance apart; lower it or raise feature_dim");
      Vector candidate = random_vector(config.feature_dim, config.prototype_scale, rng);
      bool ok = true;
      for (TokenId other = 1; other < id && ok; ++other)
        ok = (candidate - lex.prototypes[static_cast<std::size_t>(other)]).norm() >= config.min_prototype_distance;
      if (ok) {
        lex.prototypes[static_cast<std::size_t>(id)] = std::move(candidate);
        break;
      }
    }
  }
  for (int k = 0; k < config.dual_script_pairs; ++k) {
    const TokenId first = 1 + k;
    const TokenId second = 1 + config.exclusive_tokens + k;
    lex.prototypes[static_cast<std::size_t>(second)] =
        lex.prototypes[static_cast<std::size_t>(first)] +
        random_vector(config.feature_dim, config.dual_script_jitter, rng);
  }

  const Vector base_signs = random_signs(config.feature_dim, rng);
  for (int l = 0; l < n_lang; ++l) {
    SyntheticLanguageSpec spec;
    spec.language = l;
    spec.name = config.languages[static_cast<std::size_t>(l)];
    for (int k = 0; k < config.exclusive_tokens; ++k) spec.exclusive.push_back(1 + l * config.exclusive_tokens + k);
    for (int k = 0; k < config.shared_tokens; ++k) spec.shared.push_back(1 + n_lang * config.exclusive_tokens + k);
    if (n_lang == 2)
      spec.offset = (l == 0 ? Real(1) : Real(-1)) * static_cast<Real>(config.language_offset) * base_signs;
    else
      spec.offset = static_cast<Real>(config.language_offset) * random_signs(config.feature_dim, rng);
    spec.noise_sigma = config.noise_sigma;
    spec.min_frames = config.min_frames_per_token;
    spec.max_frames = config.max_frames_per_token;
    lex.languages.push_back(std::move(spec));
  }
  lex.validate();
  return lex;
}

std::vector<int> largest_remainder(const std::vector<double>& weights, int total) {
  require(!weights.empty(), "largest_remainder needs weights");
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  require(sum > 0.0, "weights must have a positive sum");
  std::vector<int> counts(weights.size());
  std::vector<double> remainders(weights.size());
  int assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    require(weights[i] >= 0.0, "weights must be non-negative");
    const double exact = total * weights[i] / sum;
    counts[i] = static_cast<int>(std::floor(exact));
    remainders[i] = exact - counts[i];
    assigned += counts[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return remainders[a] > remainders[b]; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++counts[order[k % order.size()]];
  return counts;
}

std::vector<std::size_t> Corpus::language_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_languages()), 0);
  for (const auto& u : utterances) ++counts.at(static_cast<std::size_t>(u.language));
  return counts;
}

Corpus generate_split(const SyntheticLexicon& lexicon, const CorpusManifest& manifest, int size,
                      const std::string& prefix, std::uint64_t seed) {
  lexicon.validate();
  const int n_lang = lexicon.n_languages();
  require(size >= 0, "split size must be non-negative");
  require(static_cast<int>(manifest.language_proportions.size()) == n_lang,
          "language_proportions must list one weight per language");
  for (double r : {manifest.code_switch_rate, manifest.wake_only_fraction, manifest.wake_prefix_rate})
    require(r >= 0.0 && r <= 1.0, "corpus rates must lie in [0, 1]");

  Corpus corpus;
  corpus.vocab = lexicon.vocab;
  corpus.wake_token = lexicon.wake_token;
  for (const auto& spec : lexicon.languages) corpus.language_names.push_back(spec.name);

  Rng rng(seed);
  std::vector<int> languages;
  const auto counts = largest_remainder(manifest.language_proportions, size);
  for (int l = 0; l < n_lang; ++l) languages.insert(languages.end(), static_cast<std::size_t>(counts[l]), l);
  rng.shuffle(languages);

  std::vector<char> wake_only(static_cast<std::size_t>(size), 0);
  const auto n_wake = static_cast<int>(std::llround(manifest.wake_only_fraction * size));
  std::vector<int> positions(static_cast<std::size_t>(size));
  std::iota(positions.begin(), positions.end(), 0);
  rng.shuffle(positions);
  for (int k = 0; k < n_wake; ++k) wake_only[static_cast<std::size_t>(positions[static_cast<std::size_t>(k)])] = 1;

  for (int i = 0; i < size; ++i) {
    const int lang = languages[static_cast<std::size_t>(i)];
    const auto& spec = lexicon.languages[static_cast<std::size_t>(lang)];
    Utterance utt;
    char id[32];
    std::snprintf(id, sizeof(id), "%s-%06d", prefix.c_str(), i);
    utt.id = id;
    utt.language = lang;

    if (wake_only[static_cast<std::size_t>(i)]) {
      utt.asr_targets.push_back(lexicon.wake_token);
    } else {
      if (rng.bernoulli(manifest.wake_prefix_rate)) utt.asr_targets.push_back(lexicon.wake_token);
      const int n_tokens = rng.uniform_int(lexicon.min_tokens, lexicon.max_tokens);
      for (int k = 0; k < n_tokens; ++k) {
        TokenId token;
        do {
          token = spec.exclusive[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(spec.exclusive.size()) - 1))];
          if (!spec.shared.empty() && rng.bernoulli(manifest.code_switch_rate))
            token = spec.shared[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(spec.shared.size()) - 1))];
        } while (!utt.asr_targets.empty() && utt.asr_targets.back() == token);
        utt.asr_targets.push_back(token);
      }
    }

    int total_frames = 0;
    for (std::size_t k = 0; k < utt.asr_targets.size(); ++k) {
      utt.token_frames.push_back(rng.uniform_int(spec.min_frames, spec.max_frames));
      total_frames += utt.token_frames.back();
    }
    utt.audio.resize(total_frames, lexicon.feature_dim);
    int row = 0;
    for (std::size_t k = 0; k < utt.asr_targets.size(); ++k) {
      const Vector mean = lexicon.acoustic_mean(lang, utt.asr_targets[k]);
      for (int f = 0; f < utt.token_frames[k]; ++f, ++row) {
        for (int d = 0; d < lexicon.feature_dim; ++d)
          utt.audio(row, d) = mean(d) + static_cast<Real>(spec.noise_sigma * rng.normal());
      }
    }
    utt.joint_targets = utt.asr_targets;
    utt.joint_targets.push_back(lexicon.vocab.tag_for_language(lang));
    corpus.utterances.push_back(std::move(utt));
  }
  return corpus;
}

CorpusSplits generate_corpus(const SyntheticLexicon& lexicon, const CorpusManifest& manifest) {
  Rng seeds(manifest.seed);
  const auto train_seed = seeds.fork();
  const auto test_seed = seeds.fork();
  return {generate_split(lexicon, manifest, manifest.train_size, "train", train_seed),
          generate_split(lexicon, manifest, manifest.test_size, "test", test_seed)};
}

Corpus filter_wake_word_only(const Corpus& corpus) {
  Corpus out = corpus;
  out.utterances.clear();
  for (const auto& u : corpus.utterances)
    if (!corpus.is_wake_only(u)) out.utterances.push_back(u);
  return out;
}

Corpus select_language(const Corpus& corpus, int language) {
  Corpus out = corpus;
  out.utterances.clear();
  for (const auto& u : corpus.utterances)
    if (u.language == language) out.utterances.push_back(u);
  return out;
}

Matrix freq_mask(const Matrix& audio, int n_masks, int max_width, Rng& rng) {
  const auto dim = static_cast<int>(audio.cols());
  require(max_width >= 0 && max_width <= dim, "frequency mask width exceeds feature_dim");
  require(n_masks >= 0, "n_masks must be non-negative");
  Matrix out = audio;
  for (int m = 0; m < n_masks; ++m) {
    const int width = rng.uniform_int(0, max_width);
    const int start = rng.uniform_int(0, dim - width);
    if (width > 0) out.middleCols(start, width).setZero();
  }
  return out;
}

}  // namespace rnntlid
