#include "rnntlid/lid/language_signal.hpp"

#include "rnntlid/config/kv_format.hpp"
#include "rnntlid/kernel/checkpoint.hpp"

namespace rnntlid {

std::string to_string(SignalKind kind) {
  switch (kind) {
    case SignalKind::kOracleOneHot: return "onehot";
    case SignalKind::kLidEmbedding: return "embed";
    case SignalKind::kLidPosterior: return "posterior";
  }
  return "onehot";
}

SignalKind parse_signal_kind(const std::string& text) {
  if (text == "onehot") return SignalKind::kOracleOneHot;
  if (text == "embed") return SignalKind::kLidEmbedding;
  if (text == "posterior") return SignalKind::kLidPosterior;
  throw std::invalid_argument("signal must be one of onehot|embed|posterior, got '" + text + "'");
}

LanguageSignal oracle_one_hot(int language, int n_languages, int frames) {
  require(n_languages >= 1 && language >= 0 && language < n_languages, "one-hot language out of range");
  LanguageSignal s;
  s.kind = SignalKind::kOracleOneHot;
  s.rows = Matrix::Zero(frames, n_languages);
  s.rows.col(language).setOnes();
  return s;
}

void save_signals(const std::filesystem::path& path, const std::vector<SignalFileEntry>& entries) {
  KvDocument doc;
  doc.set("signal.count", std::to_string(entries.size()));
  if (!entries.empty()) doc.set("signal.kind", to_string(entries.front().signal.kind));
  Envelope env;
  env.kind = "signal";
  env.config_text = doc.render();
  for (const auto& e : entries) {
    require(e.signal.kind == entries.front().signal.kind, "a signal file holds one signal kind");
    env.tensors.push_back({e.utterance_id, e.signal.rows});
  }
  save_envelope(path, env);
}

std::vector<SignalFileEntry> load_signals(const std::filesystem::path& path) {
  const Envelope env = load_envelope(path);
  require(env.kind == "signal", path.string() + " is not a signal file");
  const KvDocument doc = KvDocument::parse(env.config_text);
  const SignalKind kind = env.tensors.empty() ? SignalKind::kLidEmbedding : parse_signal_kind(doc.get("signal.kind"));
  std::vector<SignalFileEntry> out;
  for (const auto& t : env.tensors) out.push_back({t.name, {kind, t.value}});
  return out;
}

}  // namespace rnntlid
