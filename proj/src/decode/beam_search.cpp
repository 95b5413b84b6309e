#include "rnntlid/decode/beam_search.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rnntlid/kernel/activations.hpp"

namespace rnntlid {

bool EmissionGate::allows(double p) const { return std::pow(p, alpha) >= beta; }

bool gate_allows(const EmissionGate& gate, double p) {
  require(p >= 0.0 && p <= 1.0, "gate probability must lie in [0, 1]");
  return gate.allows(p);
}

void DecodeOptions::validate() const {
  require(beam_width >= 1, "beam width must be at least 1");
  require(temperature > 0.0, "temperature must be positive");
  require(max_symbols_per_frame >= 1, "max_symbols_per_frame must be at least 1");
  require(gate.alpha >= 0.0, "gate alpha must be non-negative");
  require(gate.beta >= 0.0 && gate.beta <= 1.0, "gate beta must lie in [0, 1]");
}

std::vector<TokenId> strip_language_tags(const Vocab& vocab, std::span<const TokenId> tokens) {
  std::vector<TokenId> out;
  for (TokenId y : tokens)
    if (!vocab.is_tag(y)) out.push_back(y);
  return out;
}

namespace {

struct Candidate {
  std::size_t parent = 0;
  TokenId token = kBlank;  // blank closes the hypothesis for this frame
  bool closed = false;
  double log_prob = 0.0;
  std::vector<TokenId> tokens;
};

bool ranks_before(const Candidate& a, const Candidate& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
  if (a.tokens != b.tokens) return a.tokens < b.tokens;
  return a.closed && !b.closed;
}

bool hyp_before(const Hypothesis& a, const Hypothesis& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
  return a.tokens < b.tokens;
}

}  // namespace

StreamingDecoder::StreamingDecoder(const Transducer& model, DecodeOptions options)
    : model_(model), options_(options), encoder_state_(model.initial_encoder_state()) {
  options_.validate();
  Hypothesis start;
  start.decoder_state = model_.initial_decoder_state();
  start.decoder_projection = model_.joint_decoder_projection(model_.decode_step(start.decoder_state, kStartOfSequence));
  beam_.push_back(std::move(start));
}

Hypothesis StreamingDecoder::extend(const Hypothesis& parent, TokenId token) const {
  Hypothesis h;
  h.tokens = parent.tokens;
  h.tokens.push_back(token);
  h.decoder_state = parent.decoder_state;
  h.decoder_projection = model_.joint_decoder_projection(model_.decode_step(h.decoder_state, token));
  return h;
}

bool StreamingDecoder::expand(Beam& beam, const Vector& encoder_projection, bool allow_tags) const {
  const Vocab& vocab = model_.vocab();
  const auto temperature = static_cast<Real>(options_.temperature);
  bool tag_admitted = false;

  Beam open = std::move(beam);
  std::vector<Candidate> closed;  // parents refer to `closed_hyps`
  Beam closed_hyps;

  for (int round = 0; round <= options_.max_symbols_per_frame && !open.empty(); ++round) {
    const bool may_emit = round < options_.max_symbols_per_frame;
    std::vector<Candidate> pool = closed;
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i].parent = i;

    std::vector<Candidate> fresh;
    for (std::size_t p = 0; p < open.size(); ++p) {
      const Hypothesis& h = open[p];
      const Vector log_probs = log_softmax(model_.joint_output(encoder_projection, h.decoder_projection), temperature);
      fresh.push_back({p, kBlank, true, h.log_prob + static_cast<double>(log_probs(kBlank)), h.tokens});
      if (!may_emit) continue;
      for (TokenId k = 1; k < vocab.size(); ++k) {
        if (vocab.is_tag(k)) {
          if (!allow_tags || !options_.gate.allows(std::exp(static_cast<double>(log_probs(k))))) continue;
          tag_admitted = true;
        }
        Candidate c{p, k, false, h.log_prob + static_cast<double>(log_probs(k)), h.tokens};
        c.tokens.push_back(k);
        fresh.push_back(std::move(c));
      }
    }

    // Merge identical (tokens, closed) entries. Hypotheses closed in an
    // earlier round keep their parent index into closed_hyps.
    std::map<std::pair<std::vector<TokenId>, bool>, std::size_t> seen;
    std::vector<Candidate> merged;
    std::vector<char> from_closed;
    auto add = [&](Candidate c, bool old) {
      auto key = std::make_pair(c.tokens, c.closed);
      auto it = seen.find(key);
      if (it == seen.end()) {
        seen.emplace(std::move(key), merged.size());
        merged.push_back(std::move(c));
        from_closed.push_back(old ? 1 : 0);
      } else {
        merged[it->second].log_prob = log_add_exp(merged[it->second].log_prob, c.log_prob);
      }
    };
    for (auto& c : pool) add(std::move(c), true);
    for (auto& c : fresh) add(std::move(c), false);

    std::vector<std::size_t> order(merged.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return ranks_before(merged[a], merged[b]); });
    order.resize(std::min(order.size(), static_cast<std::size_t>(options_.beam_width)));

    Beam next_open;
    Beam next_closed_hyps;
    std::vector<Candidate> next_closed;
    for (auto i : order) {
      const Candidate& c = merged[i];
      if (c.closed) {
        Hypothesis h = from_closed[i] ? closed_hyps[c.parent] : open[c.parent];
        h.log_prob = c.log_prob;
        next_closed.push_back(c);
        next_closed_hyps.push_back(std::move(h));
      } else {
        Hypothesis h = extend(open[c.parent], c.token);
        h.log_prob = c.log_prob;
        next_open.push_back(std::move(h));
      }
    }
    open = std::move(next_open);
    closed = std::move(next_closed);
    closed_hyps = std::move(next_closed_hyps);
  }

  std::stable_sort(closed_hyps.begin(), closed_hyps.end(), hyp_before);
  beam = std::move(closed_hyps);
  return tag_admitted;
}

void StreamingDecoder::accept_frame(const Vector& frame, const Vector* language) {
  const bool joint_language = injects_joint(model_.config().injection);
  const Vector encoder_out =
      model_.encode_step(encoder_state_, frame, injects_encoder(model_.config().injection) ? language : nullptr);
  if (joint_language) require(language != nullptr, "this model needs l_t for every frame");
  last_encoder_projection_ = model_.joint_encoder_projection(encoder_out, joint_language ? language : nullptr);

  const bool tracks_language = model_.vocab().n_tags() > 0;
  if (!tracks_language) {
    expand(beam_, last_encoder_projection_, false);
  } else if (diverged_) {
    expand(beam_, last_encoder_projection_, true);
    expand(tag_free_beam_, last_encoder_projection_, false);
  } else {
    Beam before = beam_;
    if (expand(beam_, last_encoder_projection_, true)) {
      diverged_ = true;
      tag_free_beam_ = std::move(before);
      expand(tag_free_beam_, last_encoder_projection_, false);
    }
  }
  ++frames_;
}

std::vector<TokenId> StreamingDecoder::partial() const { return beam_.front().tokens; }

DecodeResult StreamingDecoder::finish() const {
  require(frames_ >= 1, "cannot finish a decode with no audio frames");
  const Vocab& vocab = model_.vocab();
  DecodeResult result;
  result.n_best = beam_;
  result.one_best_tokens = beam_.front().tokens;
  result.one_best_log_prob = beam_.front().log_prob;
  result.stripped_tokens = strip_language_tags(vocab, result.one_best_tokens);

  if (vocab.n_tags() > 0) {
    const Hypothesis& context = diverged_ ? tag_free_beam_.front() : beam_.front();
    const Vector logits = model_.joint_output(last_encoder_projection_, context.decoder_projection);
    result.final_language_posteriors = softmax(logits.segment(vocab.first_tag(), vocab.n_tags()));
    Eigen::Index best = 0;
    result.final_language_posteriors.maxCoeff(&best);
    result.predicted_language = static_cast<int>(best);
  }
  return result;
}

DecodeResult decode_utterance(const Transducer& model, const Matrix& audio, const Matrix* language,
                              const DecodeOptions& options) {
  require(audio.rows() >= 1, "cannot decode empty audio");
  if (model.config().injection != Injection::kNone) {
    require(language != nullptr && language->rows() == audio.rows(), "language signal must cover every frame");
  } else {
    require(language == nullptr, "language signal supplied without an injection mode");
  }
  StreamingDecoder decoder(model, options);
  for (Eigen::Index t = 0; t < audio.rows(); ++t) {
    Vector l;
    if (language != nullptr) l = language->row(t).transpose();
    decoder.accept_frame(audio.row(t).transpose(), language != nullptr ? &l : nullptr);
  }
  return decoder.finish();
}

}  // namespace rnntlid
