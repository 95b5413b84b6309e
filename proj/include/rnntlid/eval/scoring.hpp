#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rnntlid/corpus/synth.hpp"
#include "rnntlid/decode/beam_search.hpp"
#include "rnntlid/eval/wer.hpp"

namespace rnntlid {

// One decoded utterance as written to a results file (one JSON object per line).
struct DecodeRecord {
  std::string id;
  std::vector<TokenId> stripped;
  std::vector<TokenId> raw;
  int predicted_language = -1;
  std::vector<double> final_posteriors;
};

DecodeRecord make_record(const std::string& id, const DecodeResult& result);
void write_records(const std::filesystem::path& path, const Vocab& vocab, const std::vector<std::string>& language_names,
                   const std::vector<DecodeRecord>& records);
std::vector<DecodeRecord> read_records(const std::filesystem::path& path);

struct LanguageScore {
  std::string language;
  int utterances = 0;
  int reference_tokens = 0;
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  double wer = 0.0;  // corpus-level (S + D + I) / reference tokens
  std::optional<double> lid_accuracy;
};

struct ScoreReport {
  std::vector<LanguageScore> per_language;
};

// Fraction of correct predictions per true language; languages without
// utterances are absent (nullopt). Results and truths must cover the same ids.
std::vector<std::optional<double>> lid_accuracy(const std::vector<DecodeRecord>& results,
                                                const std::map<std::string, int>& truths, int n_languages);

// WER per language (hypotheses must be tag-free) and, when `with_lid`,
// LID accuracy from predicted_language.
ScoreReport score(const Corpus& reference, const std::vector<DecodeRecord>& results, bool with_lid);

// (base - system) / base * 100. With a zero baseline the value is 0 for a
// zero system WER and undefined (nullopt) otherwise.
std::optional<double> relative_werr(double base_wer, double system_wer);

std::string score_csv(const ScoreReport& report);

}  // namespace rnntlid
