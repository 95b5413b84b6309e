#pragma once

#include <filesystem>
#include <string>

#include "rnntlid/config/kv_format.hpp"
#include "rnntlid/corpus/synth.hpp"

namespace rnntlid {

// On-disk layout of a generated corpus directory:
//
//   manifest.txt     key = value: generator settings, vocab, languages
//   <split>.utts     per utterance a text header line
//                      utterance <id> language <l> frames <T> dim <D> targets <n> <ids...>
//                    followed by T * D little-endian float32 values
void write_split(const std::filesystem::path& file, const Corpus& corpus);
void read_split_into(const std::filesystem::path& file, Corpus& corpus);

void write_corpus_manifest(const std::filesystem::path& dir, const KvDocument& settings, const Corpus& reference);
Corpus read_corpus(const std::filesystem::path& dir, const std::string& split);

}  // namespace rnntlid
