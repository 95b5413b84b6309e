#include "rnntlid/eval/scoring.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rnntlid/config/kv_format.hpp"

namespace rnntlid {

DecodeRecord make_record(const std::string& id, const DecodeResult& result) {
  DecodeRecord r;
  r.id = id;
  r.stripped = result.stripped_tokens;
  r.raw = result.one_best_tokens;
  r.predicted_language = result.predicted_language;
  for (Eigen::Index k = 0; k < result.final_language_posteriors.size(); ++k)
    r.final_posteriors.push_back(static_cast<double>(result.final_language_posteriors(k)));
  return r;
}

void write_records(const std::filesystem::path& path, const Vocab& vocab, const std::vector<std::string>& language_names,
                   const std::vector<DecodeRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["stripped"] = r.stripped;
    j["raw"] = r.raw;
    std::vector<std::string> text;
    for (TokenId y : r.stripped) text.push_back(vocab.symbol(y));
    j["stripped_text"] = join_words(text);
    j["predicted_language"] = r.predicted_language;
    j["language_name"] = r.predicted_language >= 0 && r.predicted_language < static_cast<int>(language_names.size())
                             ? language_names[static_cast<std::size_t>(r.predicted_language)]
                             : "";
    j["final_posteriors"] = r.final_posteriors;
    out << j.dump() << '\n';
  }
}

std::vector<DecodeRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<DecodeRecord> out;
  for (std::string line; std::getline(in, line);) {
    if (trim(line).empty()) continue;
    const auto j = nlohmann::json::parse(line);
    DecodeRecord r;
    r.id = j.at("id").get<std::string>();
    r.stripped = j.at("stripped").get<std::vector<TokenId>>();
    r.raw = j.at("raw").get<std::vector<TokenId>>();
    r.predicted_language = j.at("predicted_language").get<int>();
    r.final_posteriors = j.at("final_posteriors").get<std::vector<double>>();
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::optional<double>> lid_accuracy(const std::vector<DecodeRecord>& results,
                                                const std::map<std::string, int>& truths, int n_languages) {
  require(results.size() == truths.size(), "results and truths cover different utterance sets");
  std::vector<int> correct(static_cast<std::size_t>(n_languages), 0);
  std::vector<int> total(static_cast<std::size_t>(n_languages), 0);
  std::set<std::string> seen;
  for (const auto& r : results) {
    const auto it = truths.find(r.id);
    require(it != truths.end(), "no reference language for utterance " + r.id);
    require(seen.insert(r.id).second, "duplicate result for utterance " + r.id);
    require(r.predicted_language >= 0, "result for " + r.id + " carries no predicted language");
    const auto lang = static_cast<std::size_t>(it->second);
    ++total.at(lang);
    if (r.predicted_language == it->second) ++correct[lang];
  }
  std::vector<std::optional<double>> acc(static_cast<std::size_t>(n_languages));
  for (std::size_t l = 0; l < acc.size(); ++l)
    if (total[l] > 0) acc[l] = static_cast<double>(correct[l]) / total[l];
  return acc;
}

ScoreReport score(const Corpus& reference, const std::vector<DecodeRecord>& results, bool with_lid) {
  std::map<std::string, const Utterance*> by_id;
  std::map<std::string, int> truths;
  for (const auto& u : reference.utterances) {
    by_id[u.id] = &u;
    truths[u.id] = u.language;
  }
  require(results.size() == reference.size(), "results do not cover the reference corpus");

  ScoreReport report;
  for (const auto& name : reference.language_names) {
    LanguageScore s;
    s.language = name;
    report.per_language.push_back(s);
  }
  for (const auto& r : results) {
    const auto it = by_id.find(r.id);
    require(it != by_id.end(), "result for unknown utterance " + r.id);
    const Utterance& u = *it->second;
    const WerResult w = wer(reference.vocab, u.asr_targets, r.stripped);
    auto& s = report.per_language[static_cast<std::size_t>(u.language)];
    ++s.utterances;
    s.reference_tokens += w.reference_length;
    s.substitutions += w.substitutions;
    s.deletions += w.deletions;
    s.insertions += w.insertions;
  }
  for (auto& s : report.per_language)
    s.wer = s.reference_tokens > 0
                ? static_cast<double>(s.substitutions + s.deletions + s.insertions) / s.reference_tokens
                : 0.0;
  if (with_lid) {
    const auto acc = lid_accuracy(results, truths, reference.n_languages());
    for (std::size_t l = 0; l < acc.size(); ++l) report.per_language[l].lid_accuracy = acc[l];
  }
  return report;
}

std::optional<double> relative_werr(double base_wer, double system_wer) {
  if (base_wer == 0.0) return system_wer == 0.0 ? std::optional<double>(0.0) : std::nullopt;
  return (base_wer - system_wer) / base_wer * 100.0;
}

std::string score_csv(const ScoreReport& report) {
  std::ostringstream out;
  out << "language,utterances,reference_tokens,substitutions,deletions,insertions,wer,lid_accuracy\n";
  for (const auto& s : report.per_language) {
    out << s.language << ',' << s.utterances << ',' << s.reference_tokens << ',' << s.substitutions << ','
        << s.deletions << ',' << s.insertions << ',' << format_double(s.wer) << ','
        << (s.lid_accuracy ? format_double(*s.lid_accuracy) : "") << '\n';
  }
  return out.str();
}

}  // namespace rnntlid
