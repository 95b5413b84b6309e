#pragma once

#include <string>
#include <vector>

#include "rnntlid/config/kv_format.hpp"

namespace rnntlid {

using TokenId = int;

inline constexpr TokenId kBlank = 0;
// Decoder input for u = 0. It has its own learned embedding row (row 0, the
// row blank would occupy, since blank is never fed to the decoder).
inline constexpr TokenId kStartOfSequence = -1;

// Ordered symbol table: blank at 0, then ASR tokens, then one language tag
// per language, contiguous and last.
class Vocab {
 public:
  Vocab() = default;
  Vocab(std::vector<std::string> asr_symbols, std::vector<std::string> tag_symbols);

  int size() const { return 1 + n_asr() + n_tags(); }
  int n_asr() const { return static_cast<int>(asr_.size()); }
  int n_tags() const { return static_cast<int>(tags_.size()); }
  TokenId first_tag() const { return 1 + n_asr(); }

  bool is_asr(TokenId id) const { return id >= 1 && id <= n_asr(); }
  bool is_tag(TokenId id) const { return id >= first_tag() && id < size(); }
  bool contains(TokenId id) const { return id >= 0 && id < size(); }

  TokenId tag_for_language(int language) const;
  int language_of_tag(TokenId id) const;

  const std::string& symbol(TokenId id) const;
  TokenId id_of(const std::string& symbol) const;

  // Same ASR tokens, no language tags.
  Vocab without_tags() const { return Vocab(asr_, {}); }

  void write(KvDocument& doc, const std::string& section) const;
  static Vocab read(const KvDocument& doc, const std::string& section);

  bool operator==(const Vocab&) const = default;

 private:
  std::vector<std::string> asr_;
  std::vector<std::string> tags_;
};

}  // namespace rnntlid
