#include "rnntlid/corpus/corpus_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace rnntlid {

namespace {

std::uint32_t le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big)
    return ((v & 0xffU) << 24) | ((v & 0xff00U) << 8) | ((v >> 8) & 0xff00U) | (v >> 24);
  return v;
}

void expect(std::istream& in, const std::string& word, const std::filesystem::path& file) {
  std::string got;
  in >> got;
  if (got != word) throw std::runtime_error(file.string() + ": expected '" + word + "', got '" + got + "'");
}

}  // namespace

void write_split(const std::filesystem::path& file, const Corpus& corpus) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  for (const auto& u : corpus.utterances) {
    out << "utterance " << u.id << " language " << u.language << " frames " << u.audio.rows() << " dim "
        << u.audio.cols() << " targets " << u.asr_targets.size();
    for (TokenId y : u.asr_targets) out << ' ' << y;
    out << '\n';
    for (Eigen::Index r = 0; r < u.audio.rows(); ++r) {
      for (Eigen::Index c = 0; c < u.audio.cols(); ++c) {
        const auto word = le(std::bit_cast<std::uint32_t>(static_cast<float>(u.audio(r, c))));
        out.write(reinterpret_cast<const char*>(&word), sizeof(word));
      }
    }
  }
  if (!out) throw std::runtime_error("failed writing " + file.string());
}

void read_split_into(const std::filesystem::path& file, Corpus& corpus) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  corpus.utterances.clear();
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    std::istringstream header(line);
    Utterance u;
    Eigen::Index frames = 0, dim = 0;
    std::size_t n_targets = 0;
    expect(header, "utterance", file);
    header >> u.id;
    expect(header, "language", file);
    header >> u.language;
    expect(header, "frames", file);
    header >> frames;
    expect(header, "dim", file);
    header >> dim;
    expect(header, "targets", file);
    header >> n_targets;
    u.asr_targets.resize(n_targets);
    for (auto& y : u.asr_targets) header >> y;
    if (!header) throw std::runtime_error(file.string() + ": malformed utterance header");
    require(u.language >= 0 && u.language < corpus.n_languages(), "utterance language outside the manifest");
    for (TokenId y : u.asr_targets) require(corpus.vocab.is_asr(y), "utterance target outside the ASR vocab");

    u.audio.resize(frames, dim);
    for (Eigen::Index r = 0; r < frames; ++r) {
      for (Eigen::Index c = 0; c < dim; ++c) {
        std::uint32_t word = 0;
        if (!in.read(reinterpret_cast<char*>(&word), sizeof(word)))
          throw std::runtime_error(file.string() + ": truncated audio for " + u.id);
        u.audio(r, c) = static_cast<Real>(std::bit_cast<float>(le(word)));
      }
    }
    u.joint_targets = u.asr_targets;
    u.joint_targets.push_back(corpus.vocab.tag_for_language(u.language));
    corpus.utterances.push_back(std::move(u));
  }
}

void write_corpus_manifest(const std::filesystem::path& dir, const KvDocument& settings, const Corpus& reference) {
  KvDocument doc = settings;
  reference.vocab.write(doc, "vocab");
  doc.set("lexicon.languages", join_words(reference.language_names));
  doc.set("lexicon.wake_token", std::to_string(reference.wake_token));
  std::ofstream out(dir / "manifest.txt", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.txt").string());
  out << doc.render();
}

Corpus read_corpus(const std::filesystem::path& dir, const std::string& split) {
  std::ifstream in(dir / "manifest.txt");
  if (!in) throw std::runtime_error("no corpus manifest in " + dir.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const KvDocument doc = KvDocument::parse(buf.str());

  Corpus corpus;
  corpus.vocab = Vocab::read(doc, "vocab");
  corpus.language_names = split_words(doc.get("lexicon.languages"));
  corpus.wake_token = doc.get_int("lexicon.wake_token");
  require(corpus.vocab.n_tags() == corpus.n_languages(), "corpus vocab must carry one tag per language");
  read_split_into(dir / (split + ".utts"), corpus);
  return corpus;
}

}  // namespace rnntlid
