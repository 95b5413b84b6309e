#pragma once

#include <filesystem>
#include <string>

#include "rnntlid/kernel/tensor.hpp"

namespace rnntlid {

enum class SignalKind { kOracleOneHot, kLidEmbedding, kLidPosterior };

std::string to_string(SignalKind kind);
SignalKind parse_signal_kind(const std::string& text);  // onehot | embed | posterior

// Per-frame conditioning vectors l_t, one row per frame.
struct LanguageSignal {
  SignalKind kind = SignalKind::kOracleOneHot;
  Matrix rows;

  int frames() const { return static_cast<int>(rows.rows()); }
  int dim() const { return static_cast<int>(rows.cols()); }
};

// Utterance-constant one-hot rows.
LanguageSignal oracle_one_hot(int language, int n_languages, int frames);

// Signal files reuse the checkpoint envelope: one tensor per utterance id.
struct SignalFileEntry {
  std::string utterance_id;
  LanguageSignal signal;
};
void save_signals(const std::filesystem::path& path, const std::vector<SignalFileEntry>& entries);
std::vector<SignalFileEntry> load_signals(const std::filesystem::path& path);

}  // namespace rnntlid
