#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>

#include "rnntlid/config/kv_format.hpp"
#include "rnntlid/corpus/synth.hpp"
#include "rnntlid/kernel/adam.hpp"
#include "rnntlid/kernel/dense.hpp"
#include "rnntlid/kernel/lstm.hpp"
#include "rnntlid/lid/language_signal.hpp"

namespace rnntlid {

struct LidConfig {
  int feature_dim = 16;
  int layers = 2;
  int width = 32;
  int embed_dim = 8;
  int n_languages = 2;

  void validate() const;
  void write(KvDocument& doc) const;
  static LidConfig read(const KvDocument& doc);
  bool operator==(const LidConfig&) const = default;
};

// Acoustic-only language classifier: LSTM stack -> linear projection
// (the embedding) -> dense -> softmax over languages. Every per-frame output
// depends only on frames up to and including that frame.
class LidModel {
 public:
  struct Stream {
    LstmStack::State state;
  };
  struct FrameOutput {
    Vector embedding;
    Vector posterior;
  };

  LidModel(LidConfig config, std::uint64_t seed);

  const LidConfig& config() const { return config_; }
  ParameterList parameters();

  Stream start() const { return {lstm_.initial_state()}; }
  FrameOutput step(Stream& stream, const Vector& frame) const;

  // `allow_untrained` permits use of a model that has never been updated.
  LanguageSignal embed_frames(const Matrix& audio, bool allow_untrained = false) const;
  LanguageSignal posterior_frames(const Matrix& audio, bool allow_untrained = false) const;

  // Cross-entropy against `language` at the final frame, or averaged over
  // all frames when `per_frame`. Accumulates gradients; returns the loss.
  double accumulate_loss_grad(const Matrix& audio, int language, bool per_frame);

  std::int64_t trained_steps() const { return trained_steps_; }
  void mark_trained(std::int64_t steps) { trained_steps_ += steps; }
  void zero_weights();

  void save(const std::filesystem::path& path) const;
  static LidModel load(const std::filesystem::path& path);

 private:
  void check_usable(const Matrix& audio, bool allow_untrained) const;

  LidConfig config_;
  LstmStack lstm_;
  Dense projection_;
  Dense output_;
  std::int64_t trained_steps_ = 0;
};

struct LidTrainConfig {
  int steps = 600;
  int batch_size = 8;
  bool per_frame_loss = false;
  LrSchedule schedule{3e-3, 50, 0, 0.999, 1e-4};
  AdamConfig adam{};
  double grad_clip = 5.0;
  std::uint64_t seed = 3;
};

struct TrainLogRow {
  std::int64_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
  double elapsed_ms = 0.0;
};
using TrainLogger = std::function<void(const TrainLogRow&)>;

LidModel train_lid(const Corpus& corpus, const LidConfig& config, const LidTrainConfig& train,
                   const TrainLogger& log = {});

}  // namespace rnntlid
