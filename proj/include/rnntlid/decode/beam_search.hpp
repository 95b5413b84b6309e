#pragma once

#include <span>
#include <vector>

#include "rnntlid/model/transducer.hpp"

namespace rnntlid {

// Candidate filter for language-tag symbols: a tag with probability p may
// enter the beam only if p^alpha >= beta. Non-tag symbols are never gated.
struct EmissionGate {
  double alpha = 1.0;
  double beta = 0.0;

  bool allows(double p) const;
};

bool gate_allows(const EmissionGate& gate, double p);

struct DecodeOptions {
  int beam_width = 4;
  double temperature = 1.0;
  EmissionGate gate{};
  int max_symbols_per_frame = 4;

  void validate() const;
};

struct Hypothesis {
  std::vector<TokenId> tokens;  // non-blank, tags included
  DecoderState decoder_state;
  Vector decoder_projection;
  double log_prob = 0.0;
};

struct DecodeResult {
  std::vector<TokenId> one_best_tokens;
  std::vector<TokenId> stripped_tokens;
  double one_best_log_prob = 0.0;
  int predicted_language = -1;  // -1 when the vocab has no language tags
  Vector final_language_posteriors;
  std::vector<Hypothesis> n_best;
};

std::vector<TokenId> strip_language_tags(const Vocab& vocab, std::span<const TokenId> tokens);

// Frame-synchronous beam search. Within a frame every live hypothesis is
// expanded by blank (closing it for the frame) or by one symbol (keeping it
// open); the pooled candidates are merged by token sequence (log-sum-exp)
// and cut to the beam width, up to max_symbols_per_frame rounds. Ties order
// by fewer tokens, then lexicographic token order. Width 1 is greedy search.
//
// Language posteriors are read after the last frame from the best
// hypothesis of a search in which tags are never admitted, so they do not
// depend on the gate. Until the gated search admits its first tag the two
// searches coincide and only one is run.
class StreamingDecoder {
 public:
  StreamingDecoder(const Transducer& model, DecodeOptions options);

  void accept_frame(const Vector& frame, const Vector* language);
  int frames() const { return frames_; }
  // Current 1-best tokens, tags included.
  std::vector<TokenId> partial() const;
  DecodeResult finish() const;

 private:
  using Beam = std::vector<Hypothesis>;
  // Expands one frame; returns true if any tag candidate passed the gate.
  bool expand(Beam& beam, const Vector& encoder_projection, bool allow_tags) const;
  Hypothesis extend(const Hypothesis& parent, TokenId token) const;

  const Transducer& model_;
  DecodeOptions options_;
  EncoderState encoder_state_;
  Vector last_encoder_projection_;
  Beam beam_;
  Beam tag_free_beam_;
  bool diverged_ = false;
  int frames_ = 0;
};

DecodeResult decode_utterance(const Transducer& model, const Matrix& audio, const Matrix* language,
                              const DecodeOptions& options);

}  // namespace rnntlid
