#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rnntlid/corpus/synth.hpp"
#include "rnntlid/decode/beam_search.hpp"
#include "rnntlid/lid/lid_model.hpp"
#include "rnntlid/model/transducer.hpp"
#include "rnntlid/train/asr_trainer.hpp"

namespace rnntlid {

struct ModelSettings {
  int encoder_layers = 2;
  int encoder_width = 64;
  int decoder_layers = 1;
  int decoder_width = 64;
  int decoder_embed_dim = 32;
  int joint_dim = 64;
  double dropout = 0.2;
  Injection injection = Injection::kNone;
  SignalKind signal = SignalKind::kOracleOneHot;
  bool joint_training = false;
};

struct MatrixSettings {
  std::vector<EmissionGate> joint_gates = {{1.0, 0.0}, {2.0, 0.1}, {1.0, 1.0}};
  // Reuse checkpoints already present in the output directory.
  bool reuse_checkpoints = false;
  // When false a missing checkpoint is an error instead of being trained.
  bool train_missing = true;
};

// Everything a run needs. Every field has a default, the text form is the
// key-value format with sections, and unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 1;
  LexiconConfig lexicon;
  CorpusManifest corpus;
  ModelSettings model;
  LidConfig lid;
  LidTrainConfig lid_train;
  AsrTrainConfig train;
  DecodeOptions decode;
  MatrixSettings matrix;

  static RunConfig parse(std::string_view text);
  std::string render() const;
  std::string hash() const;

  // Overrides any key from environment variables named
  // RNNTLID_<SECTION>_<KEY> (upper case), e.g. RNNTLID_TRAIN_STEPS.
  void apply_environment();

  // Derives per-stage seeds from `seed`: lexicon, corpus, LID, ASR.
  void derive_seeds();

  // Transducer shape for a given vocabulary, injection mode and signal width.
  TransducerConfig transducer_config(const Vocab& vocab, Injection injection, int language_dim) const;
  // Documentation preset with the published layer sizes.
  void apply_published_shape();

  bool operator==(const RunConfig& other) const { return render() == other.render(); }
};

// Key names with their default values, in render order.
std::vector<std::pair<std::string, std::string>> config_defaults();

}  // namespace rnntlid
