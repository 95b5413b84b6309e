#include "rnntlid/model/transducer.hpp"

#include "rnntlid/kernel/checkpoint.hpp"

namespace rnntlid {

std::string to_string(Injection mode) {
  switch (mode) {
    case Injection::kNone: return "none";
    case Injection::kEncoder: return "E";
    case Injection::kJoint: return "J";
    case Injection::kBoth: return "B";
  }
  return "none";
}

Injection parse_injection(const std::string& text) {
  if (text == "none") return Injection::kNone;
  if (text == "E") return Injection::kEncoder;
  if (text == "J") return Injection::kJoint;
  if (text == "B") return Injection::kBoth;
  throw std::invalid_argument("injection must be one of none|E|J|B, got '" + text + "'");
}

void TransducerConfig::validate() const {
  require(feature_dim > 0, "feature_dim must be positive");
  require(encoder_layers > 0 && encoder_width > 0, "encoder shape must be positive");
  require(decoder_layers > 0 && decoder_width > 0 && decoder_embed_dim > 0, "decoder shape must be positive");
  require(joint_dim > 0, "joint_dim must be positive");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  require(vocab.size() >= 2, "vocab needs blank plus at least one symbol");
  if (injection == Injection::kNone)
    require(language_dim == 0, "language_dim must be 0 without injection");
  else
    require(language_dim > 0, "injection mode " + to_string(injection) + " needs language_dim > 0");
}

void TransducerConfig::write(KvDocument& doc) const {
  doc.set("model.feature_dim", std::to_string(feature_dim));
  doc.set("model.encoder_layers", std::to_string(encoder_layers));
  doc.set("model.encoder_width", std::to_string(encoder_width));
  doc.set("model.decoder_layers", std::to_string(decoder_layers));
  doc.set("model.decoder_width", std::to_string(decoder_width));
  doc.set("model.decoder_embed_dim", std::to_string(decoder_embed_dim));
  doc.set("model.joint_dim", std::to_string(joint_dim));
  doc.set("model.dropout", format_double(dropout));
  doc.set("model.injection", to_string(injection));
  doc.set("model.language_dim", std::to_string(language_dim));
  vocab.write(doc, "vocab");
}

TransducerConfig TransducerConfig::read(const KvDocument& doc) {
  TransducerConfig c;
  c.feature_dim = doc.get_int("model.feature_dim");
  c.encoder_layers = doc.get_int("model.encoder_layers");
  c.encoder_width = doc.get_int("model.encoder_width");
  c.decoder_layers = doc.get_int("model.decoder_layers");
  c.decoder_width = doc.get_int("model.decoder_width");
  c.decoder_embed_dim = doc.get_int("model.decoder_embed_dim");
  c.joint_dim = doc.get_int("model.joint_dim");
  c.dropout = doc.get_double("model.dropout");
  c.injection = parse_injection(doc.get("model.injection"));
  c.language_dim = doc.get_int("model.language_dim");
  c.vocab = Vocab::read(doc, "vocab");
  c.validate();
  return c;
}

TransducerConfig TransducerConfig::published_shape(int feature_dim, Vocab vocab) {
  TransducerConfig c;
  c.feature_dim = feature_dim;
  c.encoder_layers = 5;
  c.encoder_width = 1024;
  c.decoder_layers = 2;
  c.decoder_width = 1024;
  c.decoder_embed_dim = 512;
  c.joint_dim = 512;
  c.dropout = 0.2;
  c.vocab = std::move(vocab);
  return c;
}

Transducer::Transducer(TransducerConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  const int lang_dim = config_.language_dim;
  encoder_ = LstmStack("encoder", config_.feature_dim, config_.encoder_width, config_.encoder_layers,
                       injects_encoder(config_.injection) ? lang_dim : 0);
  embedding_ = Embedding("decoder.embedding", config_.vocab.size(), config_.decoder_embed_dim);
  decoder_ = LstmStack("decoder", config_.decoder_embed_dim, config_.decoder_width, config_.decoder_layers);
  joint_w_enc_ = Parameter("joint.w_enc", config_.joint_dim, config_.encoder_width);
  if (injects_joint(config_.injection)) joint_w_lang_ = Parameter("joint.w_lang", config_.joint_dim, lang_dim);
  joint_w_dec_ = Parameter("joint.w_dec", config_.joint_dim, config_.decoder_width);
  joint_bias_ = Parameter("joint.bias", config_.joint_dim, 1);
  joint_out_ = Dense("joint.out", config_.joint_dim, config_.vocab.size());

  Rng rng(seed);
  encoder_.init(rng);
  embedding_.init(rng);
  decoder_.init(rng);
  joint_w_enc_.init_glorot(rng);
  if (injects_joint(config_.injection)) joint_w_lang_.init_glorot(rng);
  joint_w_dec_.init_glorot(rng);
  joint_out_.init(rng);
}

ParameterList Transducer::parameters() {
  ParameterList out = encoder_.parameters();
  for (auto* p : embedding_.parameters()) out.push_back(p);
  for (auto* p : decoder_.parameters()) out.push_back(p);
  out.push_back(&joint_w_enc_);
  if (injects_joint(config_.injection)) out.push_back(&joint_w_lang_);
  out.push_back(&joint_w_dec_);
  out.push_back(&joint_bias_);
  for (auto* p : joint_out_.parameters()) out.push_back(p);
  return out;
}

Vector Transducer::encode_step(EncoderState& state, const Vector& frame, const Vector* language) const {
  require(frame.size() == config_.feature_dim, "frame dimension does not match feature_dim");
  if (injects_encoder(config_.injection)) {
    require(language != nullptr, "injection mode " + to_string(config_.injection) + " needs l_t at the encoder");
    require(language->size() == config_.language_dim, "l_t dimension mismatch");
    return encoder_.step(state, frame, language);
  }
  require(language == nullptr, "l_t supplied to the encoder in injection mode " + to_string(config_.injection));
  return encoder_.step(state, frame, nullptr);
}

int Transducer::decoder_row(TokenId y_prev) const {
  if (y_prev == kStartOfSequence) return 0;
  require(y_prev != kBlank, "blank cannot be fed to the prediction network");
  require(config_.vocab.contains(y_prev), "decoder input outside vocab");
  return y_prev;
}

Vector Transducer::decode_step(DecoderState& state, TokenId y_prev) const {
  return decoder_.step(state, embedding_.lookup(decoder_row(y_prev)), nullptr);
}

Vector Transducer::joint_encoder_projection(const Vector& encoder_out, const Vector* language) const {
  require(encoder_out.size() == config_.encoder_width, "joint encoder input dimension mismatch");
  Vector proj = joint_w_enc_.value * encoder_out;
  if (injects_joint(config_.injection)) {
    require(language != nullptr, "injection mode " + to_string(config_.injection) + " needs l_t at the joint network");
    require(language->size() == config_.language_dim, "l_t dimension mismatch");
    proj.noalias() += joint_w_lang_.value * *language;
  } else {
    require(language == nullptr, "l_t supplied to the joint network in injection mode " + to_string(config_.injection));
  }
  proj += joint_bias_.value.col(0);
  return proj;
}

Vector Transducer::joint_decoder_projection(const Vector& decoder_out) const {
  require(decoder_out.size() == config_.decoder_width, "joint decoder input dimension mismatch");
  return joint_w_dec_.value * decoder_out;
}

Vector Transducer::joint_output(const Vector& encoder_projection, const Vector& decoder_projection) const {
  const Vector hidden = (encoder_projection + decoder_projection).array().tanh();
  return joint_out_.forward(hidden);
}

Vector Transducer::joint(const Vector& encoder_out, const Vector& decoder_out, const Vector* language) const {
  return joint_output(joint_encoder_projection(encoder_out, language), joint_decoder_projection(decoder_out));
}

TransducerRecord Transducer::forward_all(const Matrix& audio, const Matrix* language,
                                         std::span<const TokenId> targets, const ForwardOptions& options) const {
  require(audio.rows() >= 1, "forward_all needs at least one frame");
  require(audio.cols() == config_.feature_dim, "audio feature dimension does not match the model");
  if (needs_language()) {
    require(language != nullptr, "injection mode " + to_string(config_.injection) + " needs a language signal");
    require(language->rows() == audio.rows() && language->cols() == config_.language_dim,
            "language signal shape does not match audio / language_dim");
  } else {
    require(language == nullptr, "language signal supplied without an injection mode");
  }
  for (TokenId y : targets) {
    require(y != kBlank, "targets may not contain blank");
    require(config_.vocab.contains(y), "target id outside vocab");
  }

  const int frames = static_cast<int>(audio.rows());
  const int labels = static_cast<int>(targets.size());
  TransducerRecord rec;
  rec.audio = audio;
  if (language != nullptr) rec.language = *language;

  const double rate = options.dropout_rng != nullptr ? config_.dropout : 0.0;
  rec.encoder_out = encoder_.forward(audio, injects_encoder(config_.injection) ? language : nullptr,
                                     &rec.encoder_cache, rate, options.dropout_rng);

  rec.decoder_rows.push_back(decoder_row(kStartOfSequence));
  for (TokenId y : targets) rec.decoder_rows.push_back(decoder_row(y));
  rec.decoder_in.resize(labels + 1, config_.decoder_embed_dim);
  for (int u = 0; u <= labels; ++u) rec.decoder_in.row(u) = embedding_.lookup(rec.decoder_rows[u]).transpose();
  rec.decoder_out = decoder_.forward(rec.decoder_in, nullptr, &rec.decoder_cache, rate, options.dropout_rng);

  std::vector<Vector> enc_proj(static_cast<std::size_t>(frames));
  for (int t = 0; t < frames; ++t) {
    Vector l;
    if (injects_joint(config_.injection)) l = language->row(t).transpose();
    enc_proj[t] = joint_encoder_projection(rec.encoder_out.row(t).transpose(),
                                           injects_joint(config_.injection) ? &l : nullptr);
  }
  std::vector<Vector> dec_proj(static_cast<std::size_t>(labels + 1));
  for (int u = 0; u <= labels; ++u) dec_proj[u] = joint_decoder_projection(rec.decoder_out.row(u).transpose());

  rec.logits = LogitsLattice(frames, labels, config_.vocab.size());
  rec.joint_hidden.resize(static_cast<Eigen::Index>(frames) * (labels + 1), config_.joint_dim);
  for (int t = 0; t < frames; ++t) {
    for (int u = 0; u <= labels; ++u) {
      const Vector hidden = (enc_proj[t] + dec_proj[u]).array().tanh();
      rec.joint_hidden.row(rec.logits.node(t, u)) = hidden.transpose();
      rec.logits.row(t, u) = joint_out_.forward(hidden).transpose();
    }
  }
  return rec;
}

void Transducer::backward(const TransducerRecord& rec, const Matrix& d_logits) {
  require(d_logits.rows() == rec.logits.data.rows() && d_logits.cols() == rec.logits.data.cols(),
          "logit gradient shape does not match the forward record");
  const int frames = rec.logits.frames;
  const int labels = rec.logits.labels;

  Matrix d_hidden = joint_out_.backward_rows(rec.joint_hidden, d_logits);
  d_hidden.array() *= (Real(1) - rec.joint_hidden.array().square());

  Matrix d_enc_proj = Matrix::Zero(frames, config_.joint_dim);
  Matrix d_dec_proj = Matrix::Zero(labels + 1, config_.joint_dim);
  for (int t = 0; t < frames; ++t) {
    for (int u = 0; u <= labels; ++u) {
      const auto row = d_hidden.row(rec.logits.node(t, u));
      d_enc_proj.row(t) += row;
      d_dec_proj.row(u) += row;
    }
  }

  joint_bias_.grad.col(0) += d_enc_proj.colwise().sum().transpose();
  joint_w_enc_.grad.noalias() += d_enc_proj.transpose() * rec.encoder_out;
  if (injects_joint(config_.injection)) joint_w_lang_.grad.noalias() += d_enc_proj.transpose() * rec.language;
  joint_w_dec_.grad.noalias() += d_dec_proj.transpose() * rec.decoder_out;

  const Matrix d_encoder_out = d_enc_proj * joint_w_enc_.value;
  encoder_.backward(rec.encoder_cache, d_encoder_out, nullptr);

  const Matrix d_decoder_out = d_dec_proj * joint_w_dec_.value;
  const Matrix d_decoder_in = decoder_.backward(rec.decoder_cache, d_decoder_out, nullptr);
  for (int u = 0; u <= labels; ++u) embedding_.accumulate_grad(rec.decoder_rows[u], d_decoder_in.row(u).transpose());
}

void Transducer::zero_language_weights() {
  if (injects_encoder(config_.injection)) encoder_.layer(0).w_aux().value.setZero();
  if (injects_joint(config_.injection)) joint_w_lang_.value.setZero();
}

void Transducer::save(const std::filesystem::path& path) const {
  KvDocument doc;
  config_.write(doc);
  Envelope env;
  env.kind = "transducer";
  env.config_text = doc.render();
  env.tensors = snapshot(const_cast<Transducer*>(this)->parameters());
  save_envelope(path, env);
}

Transducer Transducer::load(const std::filesystem::path& path) {
  const Envelope env = load_envelope(path);
  require(env.kind == "transducer", path.string() + " is not a transducer checkpoint");
  Transducer model(TransducerConfig::read(KvDocument::parse(env.config_text)), 0);
  restore(model.parameters(), env.tensors);
  return model;
}

}  // namespace rnntlid
