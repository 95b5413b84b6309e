#include "rnntlid/eval/matrix.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "rnntlid/corpus/corpus_io.hpp"
#include "rnntlid/corpus/synth.hpp"
#include "rnntlid/kernel/checkpoint.hpp"

namespace rnntlid {

namespace fs = std::filesystem;

bool MatrixReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

const MatrixRow* MatrixReport::find(const std::string& system, const std::optional<EmissionGate>& gate) const {
  for (const auto& r : rows) {
    if (r.system != system) continue;
    if (gate.has_value() != r.gate.has_value()) continue;
    if (gate && (gate->alpha != r.gate->alpha || gate->beta != r.gate->beta)) continue;
    return &r;
  }
  return nullptr;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::string gate_text(const std::optional<EmissionGate>& g) {
  if (!g) return "";
  return "(" + format_double(g->alpha) + "," + format_double(g->beta) + ")";
}

std::string fixed(const std::optional<double>& v, int digits) {
  if (!v) return "n/a";
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << *v;
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string file_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TrainLogger csv_logger(std::ofstream& out) {
  out << "step,loss,lr,elapsed_ms\n";
  return [&out](const TrainLogRow& r) {
    out << r.step << ',' << format_double(r.loss) << ',' << format_double(r.lr) << ',' << format_double(r.elapsed_ms)
        << '\n';
  };
}

struct System {
  std::string name;
  std::string file;  // checkpoint stem
  Injection injection = Injection::kNone;
  SignalKind signal = SignalKind::kOracleOneHot;
  bool joint = false;
  bool wake_filtered = false;
};

class Runner {
 public:
  Runner(const RunConfig& config, fs::path out, std::ostream* progress)
      : config_(config), out_(std::move(out)), progress_(progress) {}

  MatrixReport run();

 private:
  void say(const std::string& line) {
    if (progress_) *progress_ << line << std::endl;
  }
  fs::path ckpt(const std::string& stem) const { return out_ / "ckpt" / (stem + ".ckpt"); }
  bool need_training(const std::string& stage, const fs::path& path) const;

  const LidModel& lid();
  Transducer asr(const System& s, const Corpus& train, const Vocab& vocab);
  std::optional<SignalSource> signal_for(const System& s);
  MatrixRow score_row(const System& s, const std::vector<DecodeRecord>& records, const std::optional<EmissionGate>& gate,
                      bool with_lid);

  RunConfig config_;
  fs::path out_;
  std::ostream* progress_;
  CorpusSplits data_;
  std::optional<LidModel> lid_;
  std::vector<std::optional<double>> acoustic_;
};

bool Runner::need_training(const std::string& stage, const fs::path& path) const {
  if (config_.matrix.reuse_checkpoints && fs::exists(path)) return false;
  if (!config_.matrix.train_missing)
    throw std::runtime_error("stage " + stage + ": missing prerequisite checkpoint " + path.string());
  return true;
}

const LidModel& Runner::lid() {
  if (lid_) return *lid_;
  const auto path = ckpt("lid");
  if (need_training("LID", path)) {
    say("training acoustic LID");
    LidConfig c = config_.lid;
    c.feature_dim = config_.lexicon.feature_dim;
    c.n_languages = data_.train.n_languages();
    std::ofstream log(out_ / "logs" / "lid.csv", std::ios::trunc);
    train_lid(data_.train, c, config_.lid_train, csv_logger(log)).save(path);
  }
  // Scored and used from the stored float32 weights.
  lid_ = LidModel::load(path);
  return *lid_;
}

std::optional<SignalSource> Runner::signal_for(const System& s) {
  if (s.injection == Injection::kNone) return std::nullopt;
  SignalSource src;
  src.kind = s.signal;
  src.n_languages = data_.train.n_languages();
  if (s.signal != SignalKind::kOracleOneHot) src.lid = &lid();
  return src;
}

Transducer Runner::asr(const System& s, const Corpus& train, const Vocab& vocab) {
  const auto path = ckpt(s.file);
  const auto signal = signal_for(s);
  if (need_training(s.name, path)) {
    say("training " + s.name);
    const int dim = signal ? signal->dim() : 0;
    const TransducerConfig mc = config_.transducer_config(vocab, s.injection, dim);
    AsrTrainConfig tc = config_.train;
    tc.joint_training = s.joint;
    std::ofstream log(out_ / "logs" / (s.file + ".csv"), std::ios::trunc);
    train_asr(train, mc, signal, tc, csv_logger(log)).save(path);
  }
  return Transducer::load(path);
}

MatrixRow Runner::score_row(const System& s, const std::vector<DecodeRecord>& records,
                            const std::optional<EmissionGate>& gate, bool with_lid) {
  MatrixRow row;
  row.system = s.name;
  row.injection = to_string(s.injection);
  row.signal = s.injection == Injection::kNone ? "" : to_string(s.signal);
  row.joint = s.joint;
  row.gate = gate;
  row.per_language = score(data_.test, records, with_lid).per_language;
  return row;
}

MatrixReport Runner::run() {
  for (const char* sub : {"ckpt", "logs", "decode", "corpus"}) fs::create_directories(out_ / sub);
  write_text(out_ / "config.txt", config_.render());

  const SyntheticLexicon lexicon = build_lexicon(config_.lexicon);
  data_ = generate_corpus(lexicon, config_.corpus);
  KvDocument settings = KvDocument::parse(config_.render());
  write_corpus_manifest(out_ / "corpus", settings, data_.train);
  write_split(out_ / "corpus" / "train.utts", data_.train);
  write_split(out_ / "corpus" / "test.utts", data_.test);

  const int n_lang = data_.train.n_languages();
  MatrixReport report;
  report.languages = data_.train.language_names;
  const Vocab asr_vocab = data_.train.vocab.without_tags();
  const Vocab joint_vocab = data_.train.vocab;

  DecodeOptions decode = config_.decode;
  auto decode_to = [&](const Transducer& model, const Corpus& corpus, const std::optional<SignalSource>& signal,
                       const DecodeOptions& options, const std::string& stem) {
    auto records = decode_corpus(model, corpus, signal, options);
    write_records(out_ / "decode" / (stem + ".jsonl"), model.vocab(), corpus.language_names, records);
    return records;
  };

  // Acoustic LID baseline.
  acoustic_ = acoustic_lid_accuracy(lid(), data_.test);
  {
    MatrixRow row;
    row.system = "LID";
    row.injection = "none";
    for (int l = 0; l < n_lang; ++l) {
      LanguageScore s;
      s.language = report.languages[static_cast<std::size_t>(l)];
      s.lid_accuracy = acoustic_[static_cast<std::size_t>(l)];
      row.per_language.push_back(s);
    }
    report.rows.push_back(row);
  }

  // A0: one model per language, each decoding its own language.
  {
    std::vector<DecodeRecord> records;
    for (int l = 0; l < n_lang; ++l) {
      const std::string lang = report.languages[static_cast<std::size_t>(l)];
      const System s{"A0", "A0-" + lang};
      const Transducer model = asr(s, select_language(data_.train, l), asr_vocab);
      const auto part = decode_to(model, select_language(data_.test, l), std::nullopt, decode, s.file);
      records.insert(records.end(), part.begin(), part.end());
    }
    std::map<std::string, std::size_t> order;
    for (std::size_t i = 0; i < data_.test.size(); ++i) order[data_.test.utterances[i].id] = i;
    std::sort(records.begin(), records.end(),
              [&](const DecodeRecord& a, const DecodeRecord& b) { return order[a.id] < order[b.id]; });
    report.rows.push_back(score_row({"A0", "A0"}, records, std::nullopt, false));
  }

  std::vector<System> plain = {{"A1", "A1"}};
  for (auto [kind, prefix] : {std::pair{SignalKind::kOracleOneHot, "A2"}, std::pair{SignalKind::kLidEmbedding, "A3"}})
    for (auto mode : {Injection::kEncoder, Injection::kJoint, Injection::kBoth}) {
      const std::string name = std::string(prefix) + "^" + to_string(mode);
      plain.push_back({name, std::string(prefix) + "-" + to_string(mode), mode, kind});
    }
  for (const auto& s : plain) {
    const Transducer model = asr(s, data_.train, asr_vocab);
    const auto signal = signal_for(s);
    report.rows.push_back(score_row(s, decode_to(model, data_.test, signal, decode, s.file), std::nullopt, false));
  }

  // A4 at every configured gate, same checkpoint.
  const System a4{"A4", "A4", Injection::kNone, SignalKind::kOracleOneHot, true};
  std::vector<std::vector<DecodeRecord>> a4_records;
  {
    const Transducer model = asr(a4, data_.train, joint_vocab);
    for (const auto& gate : config_.matrix.joint_gates) {
      DecodeOptions o = decode;
      o.gate = gate;
      const std::string stem = "A4-" + format_double(gate.alpha) + "-" + format_double(gate.beta);
      a4_records.push_back(decode_to(model, data_.test, std::nullopt, o, stem));
      report.rows.push_back(score_row(a4, a4_records.back(), gate, true));
    }
  }

  // Joint systems with LID embeddings or posteriors at the strictest gate.
  const EmissionGate strict{1.0, 1.0};
  std::vector<System> joint_systems;
  for (auto mode : {Injection::kEncoder, Injection::kJoint, Injection::kBoth})
    joint_systems.push_back({"A5^" + to_string(mode), "A5-" + to_string(mode), mode, SignalKind::kLidEmbedding, true});
  joint_systems.push_back({"A6", "A6", Injection::kJoint, SignalKind::kLidPosterior, true});
  joint_systems.push_back({"A7", "A7", Injection::kJoint, SignalKind::kLidPosterior, true, true});
  const Corpus filtered = filter_wake_word_only(data_.train);
  for (const auto& s : joint_systems) {
    const Transducer model = asr(s, s.wake_filtered ? filtered : data_.train, joint_vocab);
    DecodeOptions o = decode;
    o.gate = strict;
    const auto signal = signal_for(s);
    report.rows.push_back(score_row(s, decode_to(model, data_.test, signal, o, s.file), strict, true));
  }

  // Relative columns.
  const MatrixRow* base = report.find("A0");
  for (auto& row : report.rows) {
    row.werr.assign(static_cast<std::size_t>(n_lang), std::nullopt);
    row.lid_delta_pp.assign(static_cast<std::size_t>(n_lang), std::nullopt);
    for (std::size_t l = 0; l < static_cast<std::size_t>(n_lang); ++l) {
      if (row.system != "LID") row.werr[l] = relative_werr(base->per_language[l].wer, row.per_language[l].wer);
      if (row.per_language[l].lid_accuracy && acoustic_[l])
        row.lid_delta_pp[l] = (*row.per_language[l].lid_accuracy - *acoustic_[l]) * 100.0;
    }
  }

  // Structural checks.
  {
    bool zero = true;
    for (const auto& w : base->werr) zero = zero && w.has_value() && *w == 0.0;
    report.checks.push_back({"A0 relative WERR is exactly zero", zero, ""});
  }
  {
    const auto a = report.find("A4", EmissionGate{1.0, 0.0});
    const auto b = report.find("A4", strict);
    MatrixCheck c{"A4 (1,0) has more deletions than A4 (1,1)", false, "gates (1,0) and (1,1) not both configured"};
    if (a && b) {
      int da = 0, db = 0;
      for (const auto& s : a->per_language) da += s.deletions;
      for (const auto& s : b->per_language) db += s.deletions;
      c.passed = da > db;
      c.detail = "deletions " + std::to_string(da) + " vs " + std::to_string(db);
    }
    report.checks.push_back(c);
  }
  {
    std::size_t wake_only = 0;
    for (const auto& u : filtered.utterances) wake_only += filtered.is_wake_only(u);
    report.checks.push_back({"A7 training corpus has no wake-word-only utterances", wake_only == 0,
                             std::to_string(data_.train.size() - filtered.size()) + " removed, " +
                                 std::to_string(wake_only) + " remain"});
  }
  {
    bool same = true;
    for (const auto& records : a4_records)
      for (std::size_t i = 0; i < records.size(); ++i)
        same = same && records[i].predicted_language == a4_records.front()[i].predicted_language;
    report.checks.push_back({"A4 predicted language identical across gates", same, ""});
  }
  {
    std::size_t tags = 0;
    for (std::size_t g = 0; g < config_.matrix.joint_gates.size(); ++g) {
      const auto& gate = config_.matrix.joint_gates[g];
      if (gate.alpha != strict.alpha || gate.beta != strict.beta) continue;
      for (const auto& r : a4_records[g])
        for (TokenId y : r.raw) tags += joint_vocab.is_tag(y);
    }
    report.checks.push_back({"A4 (1,1) emits no language tags", tags == 0, std::to_string(tags) + " tags emitted"});
  }

  write_text(out_ / "report.csv", matrix_csv(report));
  write_text(out_ / "report.txt", matrix_table(report));
  write_text(out_ / "checks.txt", checks_text(report));
  write_provenance(out_, config_,
                   {{"corpus_hash", content_hash(file_text(out_ / "corpus" / "train.utts") +
                                                 file_text(out_ / "corpus" / "test.utts"))},
                    {"report_hash", content_hash(file_text(out_ / "report.csv"))}});
  return report;
}

}  // namespace

std::vector<DecodeRecord> decode_corpus(const Transducer& model, const Corpus& corpus,
                                        const std::optional<SignalSource>& signal, const DecodeOptions& options) {
  std::vector<DecodeRecord> records;
  records.reserve(corpus.size());
  for (const auto& u : corpus.utterances) {
    Matrix language;
    if (signal) language = signal->rows_for(u);
    records.push_back(make_record(u.id, decode_utterance(model, u.audio, signal ? &language : nullptr, options)));
  }
  return records;
}

std::vector<std::optional<double>> acoustic_lid_accuracy(const LidModel& lid, const Corpus& corpus) {
  std::vector<DecodeRecord> records;
  std::map<std::string, int> truths;
  for (const auto& u : corpus.utterances) {
    const Matrix post = lid.posterior_frames(u.audio).rows;
    DecodeRecord r;
    r.id = u.id;
    Eigen::Index best = 0;
    post.row(post.rows() - 1).maxCoeff(&best);
    r.predicted_language = static_cast<int>(best);
    records.push_back(r);
    truths[u.id] = u.language;
  }
  return lid_accuracy(records, truths, corpus.n_languages());
}

void write_provenance(const fs::path& dir, const RunConfig& config,
                      const std::vector<std::pair<std::string, std::string>>& extra) {
  fs::create_directories(dir);
  write_text(dir / "config.txt", config.render());
  KvDocument doc;
  doc.set("provenance.seed", std::to_string(config.seed));
  doc.set("provenance.config_hash", config.hash());
  for (const auto& [k, v] : extra) doc.set("provenance." + k, v);
  write_text(dir / "provenance.txt", doc.render());
}

std::string matrix_csv(const MatrixReport& report) {
  std::ostringstream out;
  out << "system,injection,signal,joint,alpha,beta,language,utterances,reference_tokens,substitutions,deletions,"
         "insertions,wer,werr_vs_A0_percent,lid_accuracy,lid_delta_vs_acoustic_pp\n";
  for (const auto& r : report.rows) {
    for (std::size_t l = 0; l < r.per_language.size(); ++l) {
      const auto& s = r.per_language[l];
      const bool has_wer = r.system != "LID";
      out << r.system << ',' << r.injection << ',' << r.signal << ',' << (r.joint ? 1 : 0) << ','
          << (r.gate ? format_double(r.gate->alpha) : "") << ',' << (r.gate ? format_double(r.gate->beta) : "") << ','
          << s.language << ',' << s.utterances << ',' << s.reference_tokens << ',';
      if (has_wer)
        out << s.substitutions << ',' << s.deletions << ',' << s.insertions << ',' << format_double(s.wer) << ',';
      else
        out << ",,,,";
      out << (l < r.werr.size() ? opt(r.werr[l]) : "") << ',' << opt(s.lid_accuracy) << ','
          << (l < r.lid_delta_pp.size() ? opt(r.lid_delta_pp[l]) : "") << '\n';
    }
  }
  return out.str();
}

std::string matrix_table(const MatrixReport& report) {
  std::ostringstream out;
  out << "WERR is relative to A0 in percent (higher is better). LID is absolute accuracy in percent;\n"
         "dLID is the difference to the acoustic LID classifier in percentage points.\n\n";
  out << std::left << std::setw(8) << "system" << std::setw(10) << "(a,b)";
  for (const auto& lang : report.languages)
    out << std::setw(9) << (lang + " WER") << std::setw(8) << "WERR" << std::setw(8) << "LID" << std::setw(8)
        << "dLID" << std::setw(14) << "S/D/I";
  out << '\n';
  for (const auto& r : report.rows) {
    out << std::setw(8) << r.system << std::setw(10) << gate_text(r.gate);
    for (std::size_t l = 0; l < r.per_language.size(); ++l) {
      const auto& s = r.per_language[l];
      const bool has_wer = r.system != "LID";
      out << std::setw(9) << (has_wer ? fixed(s.wer * 100.0, 2) : "") << std::setw(8)
          << (has_wer ? fixed(r.werr[l], 1) : "") << std::setw(8)
          << (s.lid_accuracy ? fixed(*s.lid_accuracy * 100.0, 2) : "") << std::setw(8)
          << (r.lid_delta_pp[l] ? fixed(r.lid_delta_pp[l], 2) : "") << std::setw(14)
          << (has_wer ? std::to_string(s.substitutions) + "/" + std::to_string(s.deletions) + "/" +
                            std::to_string(s.insertions)
                      : "");
    }
    out << '\n';
  }
  return out.str();
}

std::string checks_text(const MatrixReport& report) {
  std::ostringstream out;
  for (const auto& c : report.checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) out << " (" << c.detail << ")";
    out << '\n';
  }
  return out.str();
}

MatrixReport run_matrix(const RunConfig& config, const fs::path& out_dir, std::ostream* progress) {
  return Runner(config, out_dir, progress).run();
}

}  // namespace rnntlid
