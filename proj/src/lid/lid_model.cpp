#include "rnntlid/lid/lid_model.hpp"

#include <chrono>
#include <cmath>

#include "rnntlid/corpus/batching.hpp"
#include "rnntlid/kernel/activations.hpp"
#include "rnntlid/kernel/checkpoint.hpp"

namespace rnntlid {

void LidConfig::validate() const {
  require(feature_dim > 0 && layers > 0 && width > 0 && embed_dim > 0, "LID shape must be positive");
  require(n_languages >= 2, "LID needs at least 2 languages");
}

void LidConfig::write(KvDocument& doc) const {
  doc.set("lid.feature_dim", std::to_string(feature_dim));
  doc.set("lid.layers", std::to_string(layers));
  doc.set("lid.width", std::to_string(width));
  doc.set("lid.embed_dim", std::to_string(embed_dim));
  doc.set("lid.n_languages", std::to_string(n_languages));
}

LidConfig LidConfig::read(const KvDocument& doc) {
  LidConfig c;
  c.feature_dim = doc.get_int("lid.feature_dim");
  c.layers = doc.get_int("lid.layers");
  c.width = doc.get_int("lid.width");
  c.embed_dim = doc.get_int("lid.embed_dim");
  c.n_languages = doc.get_int("lid.n_languages");
  c.validate();
  return c;
}

LidModel::LidModel(LidConfig config, std::uint64_t seed)
    : config_(config),
      lstm_("lid", config.feature_dim, config.width, config.layers),
      projection_("lid.projection", config.width, config.embed_dim),
      output_("lid.output", config.embed_dim, config.n_languages) {
  config_.validate();
  Rng rng(seed);
  lstm_.init(rng);
  projection_.init(rng);
  output_.init(rng);
}

ParameterList LidModel::parameters() {
  ParameterList out = lstm_.parameters();
  for (auto* p : projection_.parameters()) out.push_back(p);
  for (auto* p : output_.parameters()) out.push_back(p);
  return out;
}

LidModel::FrameOutput LidModel::step(Stream& stream, const Vector& frame) const {
  require(frame.size() == config_.feature_dim, "frame dimension does not match the LID model");
  const Vector h = lstm_.step(stream.state, frame);
  FrameOutput out;
  out.embedding = projection_.forward(h);
  out.posterior = softmax(output_.forward(out.embedding));
  return out;
}

void LidModel::check_usable(const Matrix& audio, bool allow_untrained) const {
  require(allow_untrained || trained_steps_ > 0, "LID model has not been trained (pass allow_untrained to override)");
  require(audio.rows() == 0 || audio.cols() == config_.feature_dim, "audio feature dimension does not match the LID model");
}

LanguageSignal LidModel::embed_frames(const Matrix& audio, bool allow_untrained) const {
  check_usable(audio, allow_untrained);
  LanguageSignal s;
  s.kind = SignalKind::kLidEmbedding;
  s.rows.resize(audio.rows(), config_.embed_dim);
  Stream stream = start();
  for (Eigen::Index t = 0; t < audio.rows(); ++t) s.rows.row(t) = step(stream, audio.row(t).transpose()).embedding.transpose();
  return s;
}

LanguageSignal LidModel::posterior_frames(const Matrix& audio, bool allow_untrained) const {
  check_usable(audio, allow_untrained);
  LanguageSignal s;
  s.kind = SignalKind::kLidPosterior;
  s.rows.resize(audio.rows(), config_.n_languages);
  Stream stream = start();
  for (Eigen::Index t = 0; t < audio.rows(); ++t) s.rows.row(t) = step(stream, audio.row(t).transpose()).posterior.transpose();
  return s;
}

double LidModel::accumulate_loss_grad(const Matrix& audio, int language, bool per_frame) {
  require(audio.rows() >= 1, "LID training needs at least one frame");
  require(language >= 0 && language < config_.n_languages, "LID label out of range");
  LstmStack::SequenceCache cache;
  const Matrix hidden = lstm_.forward(audio, nullptr, &cache);
  const Matrix embedding = projection_.forward_rows(hidden);
  const Matrix logits = output_.forward_rows(embedding);

  const Eigen::Index frames = audio.rows();
  Matrix d_logits = Matrix::Zero(frames, config_.n_languages);
  double loss = 0.0;
  const Eigen::Index first = per_frame ? 0 : frames - 1;
  const auto scale = static_cast<double>(frames - first);
  for (Eigen::Index t = first; t < frames; ++t) {
    const Vector p = softmax(logits.row(t).transpose());
    loss -= std::log(static_cast<double>(p(language))) / scale;
    Vector d = p;
    d(language) -= 1;
    d_logits.row(t) = (d / static_cast<Real>(scale)).transpose();
  }
  const Matrix d_embedding = output_.backward_rows(embedding, d_logits);
  const Matrix d_hidden = projection_.backward_rows(hidden, d_embedding);
  lstm_.backward(cache, d_hidden, nullptr);
  return loss;
}

void LidModel::zero_weights() {
  for (auto* p : parameters()) p->value.setZero();
}

void LidModel::save(const std::filesystem::path& path) const {
  KvDocument doc;
  config_.write(doc);
  doc.set("lid.trained_steps", std::to_string(trained_steps_));
  Envelope env;
  env.kind = "lid";
  env.config_text = doc.render();
  env.tensors = snapshot(const_cast<LidModel*>(this)->parameters());
  save_envelope(path, env);
}

LidModel LidModel::load(const std::filesystem::path& path) {
  const Envelope env = load_envelope(path);
  require(env.kind == "lid", path.string() + " is not a LID checkpoint");
  const KvDocument doc = KvDocument::parse(env.config_text);
  LidModel model(LidConfig::read(doc), 0);
  restore(model.parameters(), env.tensors);
  model.trained_steps_ = parse_int(doc.get("lid.trained_steps"), "lid.trained_steps");
  return model;
}

LidModel train_lid(const Corpus& corpus, const LidConfig& config, const LidTrainConfig& train, const TrainLogger& log) {
  require(corpus.n_languages() >= 2, "LID training needs at least 2 languages");
  std::size_t present = 0;
  for (auto c : corpus.language_counts()) present += c > 0 ? 1 : 0;
  require(present >= 2, "LID training corpus contains fewer than 2 languages");
  require(config.n_languages == corpus.n_languages(), "LID config language count does not match the corpus");
  require(train.steps >= 0, "LID training steps must be non-negative");

  Rng seeds(train.seed);
  LidModel model(config, seeds.fork());
  StratifiedSampler sampler(corpus, train.batch_size, seeds.fork());
  Adam adam(train.adam, train.schedule);
  const auto params = model.parameters();
  const auto started = std::chrono::steady_clock::now();

  for (int step = 1; step <= train.steps; ++step) {
    zero_grads(params);
    const auto batch = sampler.next_batch();
    double loss = 0.0;
    for (auto index : batch) {
      const auto& u = corpus.utterances[index];
      loss += model.accumulate_loss_grad(u.audio, u.language, train.per_frame_loss);
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
  model.mark_trained(train.steps);
  return model;
}

}  // namespace rnntlid
