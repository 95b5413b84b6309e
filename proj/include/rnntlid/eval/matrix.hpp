#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rnntlid/config/run_config.hpp"
#include "rnntlid/eval/scoring.hpp"
#include "rnntlid/train/asr_trainer.hpp"

namespace rnntlid {

// One line of the experiment table: a trained system decoded with one gate.
struct MatrixRow {
  std::string system;     // "A0", "A3^J", "LID", ...
  std::string injection;  // none | E | J | B
  std::string signal;     // onehot | embed | posterior, empty without injection
  bool joint = false;
  std::optional<EmissionGate> gate;  // joint systems only
  std::vector<LanguageScore> per_language;
  std::vector<std::optional<double>> werr;         // percent vs A0, per language
  std::vector<std::optional<double>> lid_delta_pp;  // percentage points vs the acoustic LID
};

struct MatrixCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct MatrixReport {
  std::vector<std::string> languages;
  std::vector<MatrixRow> rows;
  std::vector<MatrixCheck> checks;

  bool all_passed() const;
  const MatrixRow* find(const std::string& system, const std::optional<EmissionGate>& gate = std::nullopt) const;
};

std::string matrix_csv(const MatrixReport& report);
std::string matrix_table(const MatrixReport& report);
std::string checks_text(const MatrixReport& report);

// Decodes every utterance; the signal (if any) is rebuilt per utterance.
std::vector<DecodeRecord> decode_corpus(const Transducer& model, const Corpus& corpus,
                                        const std::optional<SignalSource>& signal, const DecodeOptions& options);

// Acoustic LID accuracy from the final-frame posterior, per language.
std::vector<std::optional<double>> acoustic_lid_accuracy(const LidModel& lid, const Corpus& corpus);

// Writes config.txt and provenance.txt (seed, config hash, extra entries).
void write_provenance(const std::filesystem::path& dir, const RunConfig& config,
                      const std::vector<std::pair<std::string, std::string>>& extra = {});

// Generates the corpus, trains (or reloads) every system and scores them.
// Artifacts: config.txt, provenance.txt, corpus/, ckpt/, logs/, decode/,
// report.csv, report.txt, checks.txt under `out_dir`.
MatrixReport run_matrix(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream* progress);

}  // namespace rnntlid
