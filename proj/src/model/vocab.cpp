#include "rnntlid/model/vocab.hpp"

#include <set>
#include <stdexcept>

#include "rnntlid/kernel/tensor.hpp"

namespace rnntlid {

namespace {
const std::string kBlankSymbol = "<blank>";
}

Vocab::Vocab(std::vector<std::string> asr_symbols, std::vector<std::string> tag_symbols)
    : asr_(std::move(asr_symbols)), tags_(std::move(tag_symbols)) {
  std::set<std::string> seen{kBlankSymbol};
  for (const auto* list : {&asr_, &tags_}) {
    for (const auto& s : *list) {
      require(!s.empty() && s.find_first_of(" \t\n") == std::string::npos, "vocab symbols must be non-empty words");
      require(seen.insert(s).second, "duplicate vocab symbol '" + s + "'");
    }
  }
}

TokenId Vocab::tag_for_language(int language) const {
  require(language >= 0 && language < n_tags(), "no language tag for language " + std::to_string(language));
  return first_tag() + language;
}

int Vocab::language_of_tag(TokenId id) const {
  require(is_tag(id), "token " + std::to_string(id) + " is not a language tag");
  return id - first_tag();
}

const std::string& Vocab::symbol(TokenId id) const {
  require(contains(id), "token id " + std::to_string(id) + " outside vocab");
  if (id == kBlank) return kBlankSymbol;
  if (is_asr(id)) return asr_[static_cast<std::size_t>(id - 1)];
  return tags_[static_cast<std::size_t>(id - first_tag())];
}

TokenId Vocab::id_of(const std::string& s) const {
  for (TokenId id = 0; id < size(); ++id)
    if (symbol(id) == s) return id;
  throw std::invalid_argument("unknown vocab symbol '" + s + "'");
}

void Vocab::write(KvDocument& doc, const std::string& section) const {
  doc.set(section + ".blank", "0");
  doc.set(section + ".tokens", join_words(asr_));
  doc.set(section + ".tag_first", std::to_string(first_tag()));
  doc.set(section + ".tags", join_words(tags_));
}

Vocab Vocab::read(const KvDocument& doc, const std::string& section) {
  require(doc.get_int(section + ".blank") == 0, "vocab blank id must be 0");
  Vocab v(split_words(doc.get(section + ".tokens")), split_words(doc.get_or(section + ".tags", "")));
  require(doc.get_int(section + ".tag_first") == v.first_tag(), "vocab tag range inconsistent with token count");
  return v;
}

}  // namespace rnntlid
