#include "rnntlid/config/run_config.hpp"

#include <cctype>
#include <cstdlib>
#include <functional>
#include <sstream>

#include "rnntlid/kernel/checkpoint.hpp"
#include "rnntlid/kernel/rng.hpp"

namespace rnntlid {

namespace {

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <typename T>
Field int_field(std::string key, T RunConfig::*section, int T::*member) {
  return {key, [=](const RunConfig& c) { return std::to_string(c.*section.*member); },
          [=](RunConfig& c, const std::string& v) { c.*section.*member = static_cast<int>(parse_int(v, key)); }};
}

template <typename T>
Field real_field(std::string key, T RunConfig::*section, double T::*member) {
  return {key, [=](const RunConfig& c) { return format_double(c.*section.*member); },
          [=](RunConfig& c, const std::string& v) { c.*section.*member = parse_double(v, key); }};
}

template <typename T>
Field bool_field(std::string key, T RunConfig::*section, bool T::*member) {
  return {key, [=](const RunConfig& c) { return std::string(c.*section.*member ? "true" : "false"); },
          [=](RunConfig& c, const std::string& v) { c.*section.*member = parse_bool(v, key); }};
}

template <typename T>
Field seed_field(std::string key, T RunConfig::*section, std::uint64_t T::*member) {
  return {key, [=](const RunConfig& c) { return std::to_string(c.*section.*member); },
          [=](RunConfig& c, const std::string& v) {
            const long long s = parse_int(v, key);
            require(s >= 0, key + " must be non-negative");
            c.*section.*member = static_cast<std::uint64_t>(s);
          }};
}

// Schedule fields live one level deeper.
template <typename T>
Field schedule_real(std::string key, T RunConfig::*section, double LrSchedule::*member) {
  return {key, [=](const RunConfig& c) { return format_double((c.*section).schedule.*member); },
          [=](RunConfig& c, const std::string& v) { (c.*section).schedule.*member = parse_double(v, key); }};
}

template <typename T>
Field schedule_steps(std::string key, T RunConfig::*section, std::int64_t LrSchedule::*member) {
  return {key, [=](const RunConfig& c) { return std::to_string((c.*section).schedule.*member); },
          [=](RunConfig& c, const std::string& v) { (c.*section).schedule.*member = parse_int(v, key); }};
}

template <typename T>
Field adam_real(std::string key, T RunConfig::*section, double AdamConfig::*member) {
  return {key, [=](const RunConfig& c) { return format_double((c.*section).adam.*member); },
          [=](RunConfig& c, const std::string& v) { (c.*section).adam.*member = parse_double(v, key); }};
}

std::string render_gates(const std::vector<EmissionGate>& gates) {
  std::vector<std::string> words;
  for (const auto& g : gates) words.push_back(format_double(g.alpha) + "," + format_double(g.beta));
  return join_words(words);
}

std::vector<EmissionGate> parse_gates(const std::string& text) {
  std::vector<EmissionGate> gates;
  for (const auto& w : split_words(text)) {
    const auto comma = w.find(',');
    require(comma != std::string::npos, "matrix.joint_gates entries are alpha,beta pairs");
    gates.push_back({parse_double(w.substr(0, comma), "gate alpha"), parse_double(w.substr(comma + 1), "gate beta")});
  }
  require(!gates.empty(), "matrix.joint_gates must list at least one gate");
  return gates;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    using C = RunConfig;
    std::vector<Field> f;
    f.push_back({"run.seed", [](const C& c) { return std::to_string(c.seed); },
                 [](C& c, const std::string& v) { c.seed = static_cast<std::uint64_t>(parse_int(v, "run.seed")); }});

    f.push_back({"corpus.languages", [](const C& c) { return join_words(c.lexicon.languages); },
                 [](C& c, const std::string& v) { c.lexicon.languages = split_words(v); }});
    f.push_back(int_field("corpus.exclusive_tokens", &C::lexicon, &LexiconConfig::exclusive_tokens));
    f.push_back(int_field("corpus.shared_tokens", &C::lexicon, &LexiconConfig::shared_tokens));
    f.push_back(int_field("corpus.feature_dim", &C::lexicon, &LexiconConfig::feature_dim));
    f.push_back(real_field("corpus.language_offset", &C::lexicon, &LexiconConfig::language_offset));
    f.push_back(real_field("corpus.noise_sigma", &C::lexicon, &LexiconConfig::noise_sigma));
    f.push_back(real_field("corpus.prototype_scale", &C::lexicon, &LexiconConfig::prototype_scale));
    f.push_back(real_field("corpus.min_prototype_distance", &C::lexicon, &LexiconConfig::min_prototype_distance));
    f.push_back(int_field("corpus.min_frames_per_token", &C::lexicon, &LexiconConfig::min_frames_per_token));
    f.push_back(int_field("corpus.max_frames_per_token", &C::lexicon, &LexiconConfig::max_frames_per_token));
    f.push_back(int_field("corpus.min_tokens", &C::lexicon, &LexiconConfig::min_tokens));
    f.push_back(int_field("corpus.max_tokens", &C::lexicon, &LexiconConfig::max_tokens));
    f.push_back(int_field("corpus.dual_script_pairs", &C::lexicon, &LexiconConfig::dual_script_pairs));
    f.push_back(real_field("corpus.dual_script_jitter", &C::lexicon, &LexiconConfig::dual_script_jitter));
    f.push_back(int_field("corpus.train_size", &C::corpus, &CorpusManifest::train_size));
    f.push_back(int_field("corpus.test_size", &C::corpus, &CorpusManifest::test_size));
    f.push_back({"corpus.language_proportions",
                 [](const C& c) {
                   std::vector<std::string> w;
                   for (double p : c.corpus.language_proportions) w.push_back(format_double(p));
                   return join_words(w);
                 },
                 [](C& c, const std::string& v) {
                   c.corpus.language_proportions.clear();
                   for (const auto& w : split_words(v))
                     c.corpus.language_proportions.push_back(parse_double(w, "corpus.language_proportions"));
                 }});
    f.push_back(real_field("corpus.code_switch_rate", &C::corpus, &CorpusManifest::code_switch_rate));
    f.push_back(real_field("corpus.wake_only_fraction", &C::corpus, &CorpusManifest::wake_only_fraction));
    f.push_back(real_field("corpus.wake_prefix_rate", &C::corpus, &CorpusManifest::wake_prefix_rate));

    f.push_back(int_field("model.encoder_layers", &C::model, &ModelSettings::encoder_layers));
    f.push_back(int_field("model.encoder_width", &C::model, &ModelSettings::encoder_width));
    f.push_back(int_field("model.decoder_layers", &C::model, &ModelSettings::decoder_layers));
    f.push_back(int_field("model.decoder_width", &C::model, &ModelSettings::decoder_width));
    f.push_back(int_field("model.decoder_embed_dim", &C::model, &ModelSettings::decoder_embed_dim));
    f.push_back(int_field("model.joint_dim", &C::model, &ModelSettings::joint_dim));
    f.push_back(real_field("model.dropout", &C::model, &ModelSettings::dropout));
    f.push_back({"model.injection", [](const C& c) { return to_string(c.model.injection); },
                 [](C& c, const std::string& v) { c.model.injection = parse_injection(v); }});
    f.push_back({"model.signal", [](const C& c) { return to_string(c.model.signal); },
                 [](C& c, const std::string& v) { c.model.signal = parse_signal_kind(v); }});
    f.push_back(bool_field("model.joint_training", &C::model, &ModelSettings::joint_training));

    f.push_back(int_field("lid.layers", &C::lid, &LidConfig::layers));
    f.push_back(int_field("lid.width", &C::lid, &LidConfig::width));
    f.push_back(int_field("lid.embed_dim", &C::lid, &LidConfig::embed_dim));
    f.push_back(int_field("lid.steps", &C::lid_train, &LidTrainConfig::steps));
    f.push_back(int_field("lid.batch_size", &C::lid_train, &LidTrainConfig::batch_size));
    f.push_back(bool_field("lid.per_frame_loss", &C::lid_train, &LidTrainConfig::per_frame_loss));
    f.push_back(schedule_real("lid.peak_lr", &C::lid_train, &LrSchedule::peak_lr));
    f.push_back(schedule_steps("lid.warmup_steps", &C::lid_train, &LrSchedule::warmup_steps));
    f.push_back(schedule_steps("lid.hold_steps", &C::lid_train, &LrSchedule::hold_steps));
    f.push_back(schedule_real("lid.decay_rate", &C::lid_train, &LrSchedule::decay_rate));
    f.push_back(schedule_real("lid.min_lr", &C::lid_train, &LrSchedule::min_lr));
    f.push_back(real_field("lid.grad_clip", &C::lid_train, &LidTrainConfig::grad_clip));

    f.push_back(int_field("train.steps", &C::train, &AsrTrainConfig::steps));
    f.push_back(int_field("train.batch_size", &C::train, &AsrTrainConfig::batch_size));
    f.push_back(schedule_real("train.peak_lr", &C::train, &LrSchedule::peak_lr));
    f.push_back(schedule_steps("train.warmup_steps", &C::train, &LrSchedule::warmup_steps));
    f.push_back(schedule_steps("train.hold_steps", &C::train, &LrSchedule::hold_steps));
    f.push_back(schedule_real("train.decay_rate", &C::train, &LrSchedule::decay_rate));
    f.push_back(schedule_real("train.min_lr", &C::train, &LrSchedule::min_lr));
    f.push_back(adam_real("train.adam_beta1", &C::train, &AdamConfig::beta1));
    f.push_back(adam_real("train.adam_beta2", &C::train, &AdamConfig::beta2));
    f.push_back(adam_real("train.adam_epsilon", &C::train, &AdamConfig::epsilon));
    f.push_back(real_field("train.grad_clip", &C::train, &AsrTrainConfig::grad_clip));
    f.push_back(int_field("train.specaug_masks", &C::train, &AsrTrainConfig::specaug_masks));
    f.push_back(int_field("train.specaug_max_width", &C::train, &AsrTrainConfig::specaug_max_width));
    f.push_back(real_field("train.tag_weight", &C::train, &AsrTrainConfig::tag_weight));

    f.push_back(int_field("decode.beam", &C::decode, &DecodeOptions::beam_width));
    f.push_back(real_field("decode.temperature", &C::decode, &DecodeOptions::temperature));
    f.push_back({"decode.alpha", [](const C& c) { return format_double(c.decode.gate.alpha); },
                 [](C& c, const std::string& v) { c.decode.gate.alpha = parse_double(v, "decode.alpha"); }});
    f.push_back({"decode.beta", [](const C& c) { return format_double(c.decode.gate.beta); },
                 [](C& c, const std::string& v) { c.decode.gate.beta = parse_double(v, "decode.beta"); }});
    f.push_back(int_field("decode.max_symbols_per_frame", &C::decode, &DecodeOptions::max_symbols_per_frame));

    f.push_back({"matrix.joint_gates", [](const C& c) { return render_gates(c.matrix.joint_gates); },
                 [](C& c, const std::string& v) { c.matrix.joint_gates = parse_gates(v); }});
    f.push_back(bool_field("matrix.reuse_checkpoints", &C::matrix, &MatrixSettings::reuse_checkpoints));
    f.push_back(bool_field("matrix.train_missing", &C::matrix, &MatrixSettings::train_missing));
    return f;
  }();
  return table;
}

std::string env_name(const std::string& key) {
  std::string name = "RNNTLID_";
  for (char ch : key) name += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return name;
}

}  // namespace

RunConfig RunConfig::parse(std::string_view text) {
  const KvDocument doc = KvDocument::parse(text);
  RunConfig config;
  for (const auto& [key, value] : doc.entries()) {
    const Field* field = nullptr;
    for (const auto& f : fields())
      if (f.key == key) field = &f;
    if (field == nullptr) throw std::invalid_argument("unknown config key '" + key + "'");
    field->set(config, value);
  }
  return config;
}

std::string RunConfig::render() const {
  KvDocument doc;
  for (const auto& f : fields()) doc.set(f.key, f.get(*this));
  return doc.render();
}

std::string RunConfig::hash() const { return content_hash(render()); }

void RunConfig::apply_environment() {
  for (const auto& f : fields()) {
    if (const char* v = std::getenv(env_name(f.key).c_str())) f.set(*this, v);
  }
}

void RunConfig::derive_seeds() {
  Rng rng(seed);
  lexicon.seed = rng.fork() >> 1;
  corpus.seed = rng.fork() >> 1;
  lid_train.seed = rng.fork() >> 1;
  train.seed = rng.fork() >> 1;
}

TransducerConfig RunConfig::transducer_config(const Vocab& vocab, Injection injection, int language_dim) const {
  TransducerConfig c;
  c.feature_dim = lexicon.feature_dim;
  c.encoder_layers = model.encoder_layers;
  c.encoder_width = model.encoder_width;
  c.decoder_layers = model.decoder_layers;
  c.decoder_width = model.decoder_width;
  c.decoder_embed_dim = model.decoder_embed_dim;
  c.joint_dim = model.joint_dim;
  c.dropout = model.dropout;
  c.injection = injection;
  c.language_dim = injection == Injection::kNone ? 0 : language_dim;
  c.vocab = vocab;
  return c;
}

void RunConfig::apply_published_shape() {
  const auto published = TransducerConfig::published_shape(lexicon.feature_dim, Vocab());
  model.encoder_layers = published.encoder_layers;
  model.encoder_width = published.encoder_width;
  model.decoder_layers = published.decoder_layers;
  model.decoder_width = published.decoder_width;
  model.decoder_embed_dim = published.decoder_embed_dim;
  model.joint_dim = published.joint_dim;
  model.dropout = published.dropout;
  lid.layers = 3;
  lid.width = 256;
  lid.embed_dim = 32;
  lexicon.feature_dim = 64;
  train.specaug_max_width = 24;
  decode.beam_width = 16;
  decode.temperature = 1.0;
}

std::vector<std::pair<std::string, std::string>> config_defaults() {
  const RunConfig defaults;
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(defaults));
  return out;
}

}  // namespace rnntlid
