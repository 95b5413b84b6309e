#include <filesystem>

#include "doctest.h"
#include "rnntlid/lid/language_signal.hpp"
#include "rnntlid/model/transducer.hpp"
#include "test_support.hpp"

using namespace rnntlid;

namespace {

TransducerConfig tiny_config(Injection injection, int feature_dim = 6) {
  TransducerConfig c;
  c.feature_dim = feature_dim;
  c.encoder_layers = 2;
  c.encoder_width = 8;
  c.decoder_layers = 1;
  c.decoder_width = 8;
  c.decoder_embed_dim = 4;
  c.joint_dim = 8;
  c.injection = injection;
  c.language_dim = injection == Injection::kNone ? 0 : 2;
  c.vocab = small_joint_vocab();
  return c;
}

void zero_all(Transducer& m) {
  for (auto* p : m.parameters()) p->value.setZero();
}

}  // namespace

TEST_CASE("encoder input widens by the language signal") {
  Transducer e(tiny_config(Injection::kEncoder), 1);
  auto* w_x = find_parameter(e.parameters(), "encoder.lstm0.w_x");
  auto* w_aux = find_parameter(e.parameters(), "encoder.lstm0.w_aux");
  REQUIRE(w_x != nullptr);
  REQUIRE(w_aux != nullptr);
  CHECK(w_x->value.cols() + w_aux->value.cols() == 8);
  Transducer none(tiny_config(Injection::kNone), 1);
  CHECK(find_parameter(none.parameters(), "encoder.lstm0.w_aux") == nullptr);
  CHECK(find_parameter(none.parameters(), "joint.w_lang") == nullptr);
}

TEST_CASE("language signal misuse is rejected") {
  Transducer none(tiny_config(Injection::kNone), 1);
  Transducer joint(tiny_config(Injection::kJoint), 1);
  Transducer enc(tiny_config(Injection::kEncoder), 1);
  const Vector frame = Vector::Zero(6);
  const Vector lang = Vector::Ones(2);
  auto s = none.initial_encoder_state();
  CHECK_THROWS_AS(none.encode_step(s, frame, &lang), ContractError);
  auto sj = joint.initial_encoder_state();
  CHECK_THROWS_AS(joint.encode_step(sj, frame, &lang), ContractError);
  auto se = enc.initial_encoder_state();
  CHECK_THROWS_AS(enc.encode_step(se, frame, nullptr), ContractError);
  const Vector h = Vector::Zero(8), g = Vector::Zero(8);
  CHECK_THROWS_AS(none.joint(h, g, &lang), ContractError);
  CHECK_THROWS_AS(joint.joint(h, g, nullptr), ContractError);
  CHECK_THROWS_AS(none.joint(Vector::Zero(7), g, nullptr), ContractError);
}

TEST_CASE("decoder step contracts") {
  Transducer m(tiny_config(Injection::kNone), 3);
  auto s = m.initial_decoder_state();
  CHECK_THROWS_AS(m.decode_step(s, kBlank), ContractError);
  auto a = m.initial_decoder_state();
  auto b = m.initial_decoder_state();
  CHECK(m.decode_step(a, 2) == m.decode_step(b, 2));
  zero_all(m);
  auto z = m.initial_decoder_state();
  CHECK(m.decode_step(z, kStartOfSequence).isZero(0.0));
}

TEST_CASE("lattice shape and zero-weight uniformity") {
  TransducerConfig c = tiny_config(Injection::kNone);
  c.vocab = Vocab({"a", "b"}, {});
  Transducer m(c, 2);
  const std::vector<TokenId> targets = {1};
  const auto lattice = m.logits_lattice(random_matrix(2, 6, 1), nullptr, targets);
  CHECK(lattice.frames == 2);
  CHECK(lattice.labels == 1);
  CHECK(lattice.data.rows() == 4);
  CHECK(lattice.data.cols() == 3);
  zero_all(m);
  CHECK(m.logits_lattice(random_matrix(2, 6, 1), nullptr, targets).data.isZero(0.0));
  Transducer full(tiny_config(Injection::kNone), 2);
  CHECK(full.logits_lattice(random_matrix(1, 6, 1), nullptr, {}).data.cols() == 6);
}

TEST_CASE("forward_all preconditions") {
  Transducer m(tiny_config(Injection::kNone), 2);
  const std::vector<TokenId> targets = {1};
  CHECK_THROWS_AS(m.forward_all(Matrix(0, 6), nullptr, targets), ContractError);
  const std::vector<TokenId> blank = {1, kBlank};
  CHECK_THROWS_AS(m.forward_all(random_matrix(3, 6, 1), nullptr, blank), ContractError);
}

TEST_CASE("zeroed language weights reduce every mode to none bit for bit") {
  const Matrix audio = random_matrix(9, 6, 5);
  const Matrix language = oracle_one_hot(1, 2, 9).rows;
  const std::vector<TokenId> targets = {1, 3, 2, 5};
  Transducer base(tiny_config(Injection::kNone), 11);
  const auto expected = base.logits_lattice(audio, nullptr, targets).data;
  for (auto mode : {Injection::kEncoder, Injection::kJoint, Injection::kBoth}) {
    CAPTURE(to_string(mode));
    Transducer m(tiny_config(mode), 99);
    copy_by_name(base.parameters(), m.parameters());
    m.zero_language_weights();
    CHECK(m.logits_lattice(audio, &language, targets).data == expected);
  }
}

TEST_CASE("logits at frame t ignore later frames and later labels") {
  Transducer m(tiny_config(Injection::kBoth), 6);
  Matrix audio = random_matrix(8, 6, 1);
  const Matrix language = random_matrix(8, 2, 2);
  const std::vector<TokenId> targets = {1, 2, 3};
  const auto reference = m.logits_lattice(audio, &language, targets);
  Matrix corrupted = audio;
  corrupted.bottomRows(4) = random_matrix(4, 6, 77, 10.0);
  const auto changed = m.logits_lattice(corrupted, &language, targets);
  for (int t = 0; t < 4; ++t)
    for (int u = 0; u <= 3; ++u) CHECK(changed.row(t, u) == reference.row(t, u));
  const std::vector<TokenId> other = {1, 2, 1};
  const auto relabeled = m.logits_lattice(audio, &language, other);
  for (int t = 0; t < 8; ++t)
    for (int u = 0; u <= 2; ++u) CHECK(relabeled.row(t, u) == reference.row(t, u));
}

TEST_CASE("transducer checkpoint round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "rnntlid_model_test";
  std::filesystem::create_directories(dir);
  Transducer m(tiny_config(Injection::kJoint), 4);
  m.save(dir / "m.ckpt");
  const Transducer back = Transducer::load(dir / "m.ckpt");
  CHECK(back.config() == m.config());
  const Matrix audio = random_matrix(5, 6, 3);
  const Matrix language = oracle_one_hot(0, 2, 5).rows;
  const std::vector<TokenId> targets = {2};
  const Matrix a = m.logits_lattice(audio, &language, targets).data;
  const Matrix b = back.logits_lattice(audio, &language, targets).data;
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-4);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config text round trip") {
  const auto c = tiny_config(Injection::kBoth);
  KvDocument doc;
  c.write(doc);
  CHECK(TransducerConfig::read(KvDocument::parse(doc.render())) == c);
  CHECK(parse_injection("B") == Injection::kBoth);
  CHECK_THROWS(parse_injection("X"));
}
