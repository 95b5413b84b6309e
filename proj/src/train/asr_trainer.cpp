#include "rnntlid/train/asr_trainer.hpp"

#include <chrono>

#include "rnntlid/corpus/batching.hpp"
#include "rnntlid/loss/transducer_loss.hpp"

namespace rnntlid {

int SignalSource::dim() const {
  switch (kind) {
    case SignalKind::kOracleOneHot: return n_languages;
    case SignalKind::kLidEmbedding: return lid->config().embed_dim;
    case SignalKind::kLidPosterior: return lid->config().n_languages;
  }
  return 0;
}

void SignalSource::validate() const {
  if (kind != SignalKind::kOracleOneHot)
    require(lid != nullptr, "signal kind " + to_string(kind) + " needs a trained LID model");
}

Matrix SignalSource::rows_for(const Utterance& u) const {
  switch (kind) {
    case SignalKind::kOracleOneHot: return oracle_one_hot(u.language, n_languages, u.frames()).rows;
    case SignalKind::kLidEmbedding: return lid->embed_frames(u.audio).rows;
    case SignalKind::kLidPosterior: return lid->posterior_frames(u.audio).rows;
  }
  return {};
}

namespace {

void check_signal(const TransducerConfig& config, const std::optional<SignalSource>& signal) {
  if (config.injection == Injection::kNone) {
    require(!signal.has_value(), "a language signal was given but the model has no injection mode");
    return;
  }
  require(signal.has_value(), "injection mode " + to_string(config.injection) + " needs a language signal source");
  signal->validate();
  require(signal->dim() == config.language_dim, "language signal width does not match model language_dim");
}

TransducerLossOptions loss_options(const Vocab& vocab, double tag_weight) {
  TransducerLossOptions o;
  o.tag_weight = tag_weight;
  if (vocab.n_tags() > 0) o.first_tag = vocab.first_tag();
  return o;
}

}  // namespace

Transducer train_asr(const Corpus& corpus, const TransducerConfig& model_config,
                     const std::optional<SignalSource>& signal, const AsrTrainConfig& train, const TrainLogger& log) {
  require(!corpus.empty(), "cannot train on an empty corpus");
  require(train.steps >= 0 && train.batch_size >= 1, "bad training schedule");
  check_signal(model_config, signal);
  if (train.joint_training)
    require(model_config.vocab.n_tags() == corpus.n_languages(), "joint training needs one vocab tag per language");

  Rng seeds(train.seed);
  Transducer model(model_config, seeds.fork());
  StratifiedSampler sampler(corpus, train.batch_size, seeds.fork());
  Rng augment_rng(seeds.fork());
  Rng dropout_rng(seeds.fork());
  Adam adam(train.adam, train.schedule);
  const auto params = model.parameters();
  const auto options = loss_options(model_config.vocab, train.tag_weight);

  std::vector<Matrix> signal_cache(corpus.size());
  std::vector<char> cached(corpus.size(), 0);
  const auto started = std::chrono::steady_clock::now();

  for (int step = 1; step <= train.steps; ++step) {
    zero_grads(params);
    const auto batch = sampler.next_batch();
    double loss = 0.0;
    for (auto index : batch) {
      const auto& u = corpus.utterances[index];
      const Matrix* language = nullptr;
      if (signal) {
        if (!cached[index]) {
          signal_cache[index] = signal->rows_for(u);
          cached[index] = 1;
        }
        language = &signal_cache[index];
      }
      const Matrix audio = train.specaug_masks > 0
                               ? freq_mask(u.audio, train.specaug_masks, train.specaug_max_width, augment_rng)
                               : u.audio;
      const auto& targets = train.joint_training ? u.joint_targets : u.asr_targets;
      ForwardOptions fwd;
      fwd.dropout_rng = model_config.dropout > 0 ? &dropout_rng : nullptr;
      const auto record = model.forward_all(audio, language, targets, fwd);
      const auto result = transducer_loss(record.logits, targets, options);
      loss += result.loss;
      model.backward(record, loss_grad_logits(result.lattice, record.logits, targets, options));
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    scale_grads(params, inv);
    if (train.grad_clip > 0) {
      const double norm = grad_norm(params);
      if (norm > train.grad_clip) scale_grads(params, train.grad_clip / norm);
    }
    adam.update(params);
    if (log) {
      const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
      log({step, loss * inv, train.schedule.lr_at(step), ms});
    }
  }
  return model;
}

double mean_transducer_loss(const Transducer& model, const Corpus& corpus, const std::optional<SignalSource>& signal,
                            bool joint_training) {
  check_signal(model.config(), signal);
  if (corpus.empty()) return 0.0;
  double total = 0.0;
  for (const auto& u : corpus.utterances) {
    Matrix language;
    if (signal) language = signal->rows_for(u);
    const auto& targets = joint_training ? u.joint_targets : u.asr_targets;
    const auto record = model.forward_all(u.audio, signal ? &language : nullptr, targets);
    total += transducer_loss(record.logits, targets).loss;
  }
  return total / static_cast<double>(corpus.size());
}

}  // namespace rnntlid
