#pragma once

#include <cstdint>
#include <optional>

#include "rnntlid/corpus/synth.hpp"
#include "rnntlid/kernel/adam.hpp"
#include "rnntlid/lid/lid_model.hpp"
#include "rnntlid/model/transducer.hpp"

namespace rnntlid {

// Where l_t comes from for a given utterance.
struct SignalSource {
  SignalKind kind = SignalKind::kOracleOneHot;
  const LidModel* lid = nullptr;  // required for embed / posterior
  int n_languages = 2;

  int dim() const;
  Matrix rows_for(const Utterance& utterance) const;
  void validate() const;
};

struct AsrTrainConfig {
  int steps = 15000;
  int batch_size = 4;
  bool joint_training = false;  // targets carry the utterance-final language tag
  LrSchedule schedule{5e-3, 200, 8000, 0.9995, 1e-4};
  AdamConfig adam{};
  double grad_clip = 5.0;
  int specaug_masks = 2;
  int specaug_max_width = 3;
  double tag_weight = 1.0;
  std::uint64_t seed = 5;
};

// Trains a fresh transducer on `corpus`. The signal source must be given iff
// the model config injects a language signal.
Transducer train_asr(const Corpus& corpus, const TransducerConfig& model_config,
                     const std::optional<SignalSource>& signal, const AsrTrainConfig& train,
                     const TrainLogger& log = {});

// Mean per-utterance transducer loss over a corpus (no dropout, no masking).
double mean_transducer_loss(const Transducer& model, const Corpus& corpus, const std::optional<SignalSource>& signal,
                            bool joint_training);

}  // namespace rnntlid
