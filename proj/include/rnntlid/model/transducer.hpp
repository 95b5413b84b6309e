#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rnntlid/kernel/dense.hpp"
#include "rnntlid/kernel/lstm.hpp"
#include "rnntlid/model/vocab.hpp"

namespace rnntlid {

// Where the language signal l_t enters the network.
enum class Injection { kNone, kEncoder, kJoint, kBoth };

std::string to_string(Injection mode);
Injection parse_injection(const std::string& text);
inline bool injects_encoder(Injection m) { return m == Injection::kEncoder || m == Injection::kBoth; }
inline bool injects_joint(Injection m) { return m == Injection::kJoint || m == Injection::kBoth; }

struct TransducerConfig {
  int feature_dim = 16;
  int encoder_layers = 2;
  int encoder_width = 64;
  int decoder_layers = 1;
  int decoder_width = 64;
  int decoder_embed_dim = 32;
  int joint_dim = 64;
  double dropout = 0.0;
  Injection injection = Injection::kNone;
  int language_dim = 0;  // width of l_t; 0 when injection is none
  Vocab vocab;

  void validate() const;
  void write(KvDocument& doc) const;
  static TransducerConfig read(const KvDocument& doc);
  // Layer sizes from the published setup (5x1024 encoder, 2x1024 decoder,
  // 512 embedding, 512 joint). Recorded for reference only.
  static TransducerConfig published_shape(int feature_dim, Vocab vocab);

  bool operator==(const TransducerConfig&) const = default;
};

using EncoderState = LstmStack::State;
using DecoderState = LstmStack::State;

// Logits for every lattice node, row t * (U + 1) + u.
struct LogitsLattice {
  int frames = 0;   // T
  int labels = 0;   // U
  int vocab = 0;
  Matrix data;

  LogitsLattice() = default;
  LogitsLattice(int t, int u, int v) : frames(t), labels(u), vocab(v), data(Matrix::Zero(t * (u + 1), v)) {}
  Eigen::Index node(int t, int u) const { return static_cast<Eigen::Index>(t) * (labels + 1) + u; }
  auto row(int t, int u) { return data.row(node(t, u)); }
  auto row(int t, int u) const { return data.row(node(t, u)); }
};

// The intermediates recorded by forward_all for backward().
struct TransducerRecord {
  LogitsLattice logits;
  Matrix audio;
  Matrix language;          // T x language_dim, empty when unused
  Matrix encoder_out;       // T x encoder_width
  Matrix decoder_in;        // (U+1) x decoder_embed_dim
  Matrix decoder_out;       // (U+1) x decoder_width
  Matrix joint_hidden;      // T(U+1) x joint_dim, post-tanh
  std::vector<int> decoder_rows;
  LstmStack::SequenceCache encoder_cache;
  LstmStack::SequenceCache decoder_cache;
};

// Training-mode switches for a forward pass.
struct ForwardOptions {
  Rng* dropout_rng = nullptr;  // non-null enables dropout
};

// RNN transducer: LSTM transcription network, LSTM prediction network and a
// one-hidden-layer joint network. The joint network's first layer is kept in
// blocks (encoder, language, decoder) which is the concatenation-then-dense
// form written with separable weights:
//
//   enc_proj_t = (W_enc h_t + W_lang l_t) + b
//   dec_proj_u = W_dec g_u
//   z_{t,u}    = W_out tanh(enc_proj_t + dec_proj_u) + b_out
class Transducer {
 public:
  Transducer(TransducerConfig config, std::uint64_t seed);

  const TransducerConfig& config() const { return config_; }
  const Vocab& vocab() const { return config_.vocab; }
  ParameterList parameters();

  EncoderState initial_encoder_state() const { return encoder_.initial_state(); }
  DecoderState initial_decoder_state() const { return decoder_.initial_state(); }

  // l_t must be given iff the injection mode feeds the encoder.
  Vector encode_step(EncoderState& state, const Vector& frame, const Vector* language) const;
  // y_prev is kStartOfSequence or a non-blank id.
  Vector decode_step(DecoderState& state, TokenId y_prev) const;
  // l_t must be given iff the injection mode feeds the joint network.
  Vector joint(const Vector& encoder_out, const Vector& decoder_out, const Vector* language) const;

  // The two halves of joint(), for callers that reuse projections.
  Vector joint_encoder_projection(const Vector& encoder_out, const Vector* language) const;
  Vector joint_decoder_projection(const Vector& decoder_out) const;
  Vector joint_output(const Vector& encoder_projection, const Vector& decoder_projection) const;

  // Logits for every lattice node; decoder row u sees targets[0..u).
  TransducerRecord forward_all(const Matrix& audio, const Matrix* language, std::span<const TokenId> targets,
                               const ForwardOptions& options = {}) const;
  LogitsLattice logits_lattice(const Matrix& audio, const Matrix* language, std::span<const TokenId> targets) const {
    return forward_all(audio, language, targets).logits;
  }

  // Accumulates dL/dθ given dL/dlogits (same layout as record.logits.data).
  void backward(const TransducerRecord& record, const Matrix& d_logits);

  // Zeroes every weight block that reads l_t.
  void zero_language_weights();

  void save(const std::filesystem::path& path) const;
  static Transducer load(const std::filesystem::path& path);

 private:
  bool needs_language() const { return config_.injection != Injection::kNone; }
  int decoder_row(TokenId y_prev) const;

  TransducerConfig config_;
  LstmStack encoder_;
  Embedding embedding_;
  LstmStack decoder_;
  Parameter joint_w_enc_;
  Parameter joint_w_lang_;
  Parameter joint_w_dec_;
  Parameter joint_bias_;
  Dense joint_out_;
};

}  // namespace rnntlid
