#include "rnntlid/cli/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <sstream>

#include "rnntlid/corpus/corpus_io.hpp"
#include "rnntlid/corpus/synth.hpp"
#include "rnntlid/eval/matrix.hpp"
#include "rnntlid/kernel/checkpoint.hpp"
#include "rnntlid/kernel/rng.hpp"
#include "rnntlid/loss/alignment_oracle.hpp"
#include "rnntlid/loss/transducer_loss.hpp"

namespace rnntlid {

namespace fs = std::filesystem;

RunConfig load_run_config(const fs::path& path) {
  RunConfig config;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    config = RunConfig::parse(text.str());
  }
  config.apply_environment();
  config.derive_seeds();
  return config;
}

void write_artifact_provenance(const fs::path& artifact, const RunConfig& config) {
  std::ofstream out(artifact.string() + ".provenance.txt", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write provenance for " + artifact.string());
  out << "[provenance]\nseed = " << config.seed << "\nconfig_hash = " << config.hash() << "\n\n" << config.render();
}

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string data;
  std::string split = "test";
  std::string model;
  std::string lid_model;
  std::string inject;
  std::string signal;
  std::string kind = "embed";
  std::string ref;
  std::string hyp;
  bool joint = false;
  bool no_joint = false;
  bool filter_wake = false;
  std::optional<double> alpha, beta, temperature;
  std::optional<int> beam;
  int frames = 3, labels = 2, vocab = 3;
  std::uint64_t seed = 1;
};

CorpusSplits corpus_from(const RunConfig& config, const std::string& data) {
  if (data.empty()) return generate_corpus(build_lexicon(config.lexicon), config.corpus);
  CorpusSplits s;
  s.train = read_corpus(data, "train");
  if (fs::exists(fs::path(data) / "test.utts")) s.test = read_corpus(data, "test");
  return s;
}

TrainLogger csv_log(std::ofstream& out) {
  out << "step,loss,lr,elapsed_ms\n";
  return [&out](const TrainLogRow& r) {
    out << r.step << ',' << format_double(r.loss) << ',' << format_double(r.lr) << ',' << format_double(r.elapsed_ms)
        << '\n';
  };
}

int gen_data(const Options& o, std::ostream& out) {
  const RunConfig config = load_run_config(o.config);
  const auto splits = generate_corpus(build_lexicon(config.lexicon), config.corpus);
  fs::create_directories(o.out);
  write_corpus_manifest(o.out, KvDocument::parse(config.render()), splits.train);
  write_split(fs::path(o.out) / "train.utts", splits.train);
  write_split(fs::path(o.out) / "test.utts", splits.test);
  write_provenance(o.out, config);
  out << "wrote " << splits.train.size() << " train and " << splits.test.size() << " test utterances to " << o.out
      << '\n';
  return 0;
}

int train_lid_cmd(const Options& o, std::ostream& out) {
  const RunConfig config = load_run_config(o.config);
  const auto splits = corpus_from(config, o.data);
  LidConfig lc = config.lid;
  lc.feature_dim = splits.train.utterances.empty() ? config.lexicon.feature_dim : splits.train.utterances[0].audio.cols();
  lc.n_languages = splits.train.n_languages();
  std::ofstream log(o.out + ".log.csv", std::ios::trunc);
  const LidModel model = train_lid(splits.train, lc, config.lid_train, csv_log(log));
  model.save(o.out);
  write_artifact_provenance(o.out, config);
  if (!splits.test.empty()) {
    const auto acc = acoustic_lid_accuracy(model, splits.test);
    for (std::size_t l = 0; l < acc.size(); ++l)
      out << splits.test.language_names[l] << " lid_accuracy " << (acc[l] ? format_double(*acc[l]) : "n/a") << '\n';
  }
  return 0;
}

int lid_embed(const Options& o, std::ostream& out) {
  const LidModel model = LidModel::load(o.model);
  const Corpus corpus = read_corpus(o.data, o.split);
  const SignalKind kind = parse_signal_kind(o.kind);
  require(kind != SignalKind::kOracleOneHot, "lid-embed produces embed or posterior signals");
  std::vector<SignalFileEntry> entries;
  for (const auto& u : corpus.utterances)
    entries.push_back({u.id, kind == SignalKind::kLidEmbedding ? model.embed_frames(u.audio)
                                                               : model.posterior_frames(u.audio)});
  save_signals(o.out, entries);
  out << "wrote " << entries.size() << " " << to_string(kind) << " signals to " << o.out << '\n';
  return 0;
}

std::optional<SignalSource> make_signal(Injection injection, SignalKind kind, const std::optional<LidModel>& lid,
                                        int n_languages) {
  if (injection == Injection::kNone) return std::nullopt;
  SignalSource s;
  s.kind = kind;
  s.n_languages = n_languages;
  if (lid) s.lid = &*lid;
  return s;
}

void check_lid_dependency(const std::string& command, Injection injection, SignalKind kind, const std::string& lid) {
  if (injection == Injection::kNone || kind == SignalKind::kOracleOneHot) return;
  if (lid.empty() || lid == "none")
    throw ContractError(command + ": injection " + to_string(injection) + " with signal " + to_string(kind) +
                        " needs a trained LID checkpoint (missing dependency: --lid-model)");
  if (!fs::exists(lid)) throw ContractError(command + ": LID checkpoint not found: " + lid);
}

int train_asr_cmd(const Options& o, std::ostream& out) {
  RunConfig config = load_run_config(o.config);
  const Injection injection = o.inject.empty() ? config.model.injection : parse_injection(o.inject);
  const SignalKind kind = o.signal.empty() ? config.model.signal : parse_signal_kind(o.signal);
  check_lid_dependency("train-asr", injection, kind, o.lid_model);
  bool joint = config.model.joint_training;
  if (o.joint) joint = true;
  if (o.no_joint) joint = false;

  auto splits = corpus_from(config, o.data);
  const Corpus train = o.filter_wake ? filter_wake_word_only(splits.train) : splits.train;
  std::optional<LidModel> lid;
  if (injection != Injection::kNone && kind != SignalKind::kOracleOneHot) lid = LidModel::load(o.lid_model);
  const auto signal = make_signal(injection, kind, lid, train.n_languages());
  const Vocab vocab = joint ? train.vocab : train.vocab.without_tags();
  const TransducerConfig mc = config.transducer_config(vocab, injection, signal ? signal->dim() : 0);
  AsrTrainConfig tc = config.train;
  tc.joint_training = joint;
  std::ofstream log(o.out + ".log.csv", std::ios::trunc);
  const Transducer model = train_asr(train, mc, signal, tc, csv_log(log));
  model.save(o.out);
  write_artifact_provenance(o.out, config);
  out << "trained " << tc.steps << " steps on " << train.size() << " utterances, wrote " << o.out << '\n';
  return 0;
}

int decode_cmd(const Options& o, std::ostream& out) {
  const RunConfig config = load_run_config(o.config);
  const Transducer model = Transducer::load(o.model);
  const Injection injection = model.config().injection;
  if (!o.inject.empty())
    require(parse_injection(o.inject) == injection,
            "--inject " + o.inject + " does not match the checkpoint's injection mode " + to_string(injection));
  const SignalKind kind = o.signal.empty() ? config.model.signal : parse_signal_kind(o.signal);
  check_lid_dependency("decode", injection, kind, o.lid_model);
  std::optional<LidModel> lid;
  if (injection != Injection::kNone && kind != SignalKind::kOracleOneHot) lid = LidModel::load(o.lid_model);

  const Corpus corpus = read_corpus(o.data, o.split);
  DecodeOptions d = config.decode;
  if (o.alpha) d.gate.alpha = *o.alpha;
  if (o.beta) d.gate.beta = *o.beta;
  if (o.beam) d.beam_width = *o.beam;
  if (o.temperature) d.temperature = *o.temperature;
  d.validate();
  const auto signal = make_signal(injection, kind, lid, corpus.n_languages());
  if (signal) require(signal->dim() == model.config().language_dim, "signal width does not match the checkpoint");
  const auto records = decode_corpus(model, corpus, signal, d);
  write_records(o.out, model.vocab(), corpus.language_names, records);
  out << "decoded " << records.size() << " utterances to " << o.out << '\n';
  return 0;
}

int evaluate_cmd(const Options& o, std::ostream& out) {
  const Corpus ref = read_corpus(o.ref, o.split);
  const auto records = read_records(o.hyp);
  bool with_lid = !records.empty();
  for (const auto& r : records) with_lid = with_lid && r.predicted_language >= 0;
  const ScoreReport report = score(ref, records, with_lid);
  const std::string csv = score_csv(report);
  std::ofstream file(o.out, std::ios::trunc);
  if (!file) throw std::runtime_error("cannot write " + o.out);
  file << csv;
  out << csv;
  return 0;
}

int run_matrix_cmd(const Options& o, std::ostream& out) {
  const RunConfig config = load_run_config(o.config);
  const MatrixReport report = run_matrix(config, o.out, &out);
  out << '\n' << matrix_table(report) << '\n' << checks_text(report);
  return report.all_passed() ? 0 : 1;
}

int oracle_loss_cmd(const Options& o, std::ostream& out) {
  require(o.frames >= 1 && o.labels >= 0 && o.vocab >= 2, "oracle-loss needs frames >= 1, labels >= 0, vocab >= 2");
  Rng rng(o.seed);
  LogitsLattice logits(o.frames, o.labels, o.vocab);
  for (Eigen::Index i = 0; i < logits.data.size(); ++i) logits.data.data()[i] = static_cast<Real>(rng.normal());
  std::vector<TokenId> targets;
  for (int u = 0; u < o.labels; ++u) targets.push_back(static_cast<TokenId>(rng.uniform_int(1, o.vocab - 1)));
  const double fb = transducer_loss(logits, targets).loss;
  const double en = enumeration_loss(logits, targets);
  out << "paths " << static_cast<long long>(count_alignments(o.frames, o.labels)) << '\n'
      << "forward_backward " << format_double(fb) << '\n'
      << "enumeration " << format_double(en) << '\n'
      << "difference " << format_double(std::abs(fb - en)) << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Streaming transducer ASR with joint language identification"};
  app.name("rnntlid");
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic bilingual corpus");
  gen->add_option("--config", o.config, "Run config file");
  gen->add_option("--out", o.out, "Output corpus directory")->required();

  auto* tl = app.add_subcommand("train-lid", "Train the acoustic LID classifier");
  tl->add_option("--config", o.config, "Run config file");
  tl->add_option("--data", o.data, "Corpus directory (generated from the config when omitted)");
  tl->add_option("--out", o.out, "Output checkpoint")->required();

  auto* le = app.add_subcommand("lid-embed", "Write per-frame LID embeddings or posteriors");
  le->add_option("--model", o.model, "LID checkpoint")->required();
  le->add_option("--in", o.data, "Corpus directory")->required();
  le->add_option("--split", o.split, "Corpus split");
  le->add_option("--kind", o.kind, "embed or posterior");
  le->add_option("--out", o.out, "Output signal file")->required();

  auto* ta = app.add_subcommand("train-asr", "Train a transducer");
  ta->add_option("--config", o.config, "Run config file");
  ta->add_option("--data", o.data, "Corpus directory (generated from the config when omitted)");
  ta->add_option("--out", o.out, "Output checkpoint")->required();
  ta->add_option("--lid-model", o.lid_model, "LID checkpoint for embed/posterior signals");
  ta->add_option("--inject", o.inject, "none, E, J or B (overrides model.injection)");
  ta->add_option("--signal", o.signal, "onehot, embed or posterior (overrides model.signal)");
  ta->add_flag("--joint", o.joint, "Append language tags to the targets");
  ta->add_flag("--no-joint", o.no_joint, "Plain ASR targets");
  ta->add_flag("--filter-wake", o.filter_wake, "Drop wake-word-only training utterances");

  auto* de = app.add_subcommand("decode", "Decode a corpus split");
  de->add_option("--config", o.config, "Run config file (decode defaults)");
  de->add_option("--model", o.model, "Transducer checkpoint")->required();
  de->add_option("--lid-model", o.lid_model, "LID checkpoint or none");
  de->add_option("--inject", o.inject, "Must match the checkpoint");
  de->add_option("--signal", o.signal, "onehot, embed or posterior");
  de->add_option("--alpha", o.alpha, "Gate exponent");
  de->add_option("--beta", o.beta, "Gate threshold");
  de->add_option("--beam", o.beam, "Beam width");
  de->add_option("--temperature", o.temperature, "Softmax temperature");
  de->add_option("--in", o.data, "Corpus directory")->required();
  de->add_option("--split", o.split, "Corpus split");
  de->add_option("--out", o.out, "Output results file (one JSON record per line)")->required();

  auto* ev = app.add_subcommand("evaluate", "Score decode results");
  ev->add_option("--ref", o.ref, "Corpus directory")->required();
  ev->add_option("--split", o.split, "Corpus split");
  ev->add_option("--hyp", o.hyp, "Results file")->required();
  ev->add_option("--out", o.out, "Output CSV")->required();

  auto* rm = app.add_subcommand("run-matrix", "Train and score the A0-A7 system matrix");
  rm->add_option("--config", o.config, "Run config file");
  rm->add_option("--out", o.out, "Output directory")->required();

  auto* ol = app.add_subcommand("oracle-loss", "Compare forward-backward and enumeration loss on random logits");
  ol->add_option("--frames", o.frames, "T");
  ol->add_option("--labels", o.labels, "U");
  ol->add_option("--vocab", o.vocab, "Vocabulary size including blank");
  ol->add_option("--seed", o.seed, "Seed for the random logits");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const CLI::ConversionError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (gen->parsed()) return gen_data(o, out);
    if (tl->parsed()) return train_lid_cmd(o, out);
    if (le->parsed()) return lid_embed(o, out);
    if (ta->parsed()) return train_asr_cmd(o, out);
    if (de->parsed()) return decode_cmd(o, out);
    if (ev->parsed()) return evaluate_cmd(o, out);
    if (rm->parsed()) return run_matrix_cmd(o, out);
    if (ol->parsed()) return oracle_loss_cmd(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace rnntlid
