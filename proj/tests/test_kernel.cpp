#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "rnntlid/kernel/activations.hpp"
#include "rnntlid/kernel/adam.hpp"
#include "rnntlid/kernel/checkpoint.hpp"
#include "rnntlid/kernel/dense.hpp"
#include "rnntlid/kernel/dropout.hpp"
#include "rnntlid/kernel/lstm.hpp"
#include "rnntlid/kernel/rng.hpp"
#include "test_support.hpp"

using namespace rnntlid;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = static_cast<Real>(x);
  return v;
}

void zero_all(const ParameterList& params) {
  for (auto* p : params) p->value.setZero();
}

}  // namespace

TEST_CASE("zero LSTM outputs zero") {
  LstmLayer layer("l", 3, 4);
  zero_all(layer.parameters());
  auto state = layer.initial_state();
  const Vector h = layer.step(state, vec({1, -2, 3}));
  CHECK(h.isZero(0.0));
}

TEST_CASE("saturated single-unit LSTM") {
  LstmLayer layer("l", 1, 1);
  zero_all(layer.parameters());
  // Bias drives input, forget and output gates open and the candidate to 10.
  layer.bias().value(0, 0) = 100;
  layer.bias().value(1, 0) = 100;
  layer.bias().value(2, 0) = 10;
  layer.bias().value(3, 0) = 100;
  auto state = layer.initial_state();
  const Vector h = layer.step(state, vec({0}));
  CHECK(h(0) == doctest::Approx(std::tanh(std::tanh(10.0))).epsilon(1e-9));
  CHECK(h(0) == doctest::Approx(0.7616).epsilon(1e-4));
}

TEST_CASE("recurrence changes the state on repeated input") {
  LstmLayer layer("l", 2, 3);
  Rng rng(4);
  layer.init(rng);
  auto state = layer.initial_state();
  const Vector first = layer.step(state, vec({0.5, -0.5}));
  const Vector second = layer.step(state, vec({0.5, -0.5}));
  CHECK_FALSE(first.isApprox(second));
}

TEST_CASE("LSTM dimension mismatch is a contract error") {
  LstmLayer layer("l", 2, 3);
  auto state = layer.initial_state();
  CHECK_THROWS_AS(layer.step(state, vec({1, 2, 3})), ContractError);
}

TEST_CASE("stack stepping and sequence forward agree bit for bit, also across a split") {
  LstmStack stack("s", 4, 5, 3);
  Rng rng(9);
  stack.init(rng);
  const Matrix xs = random_matrix(12, 4, 17);
  const Matrix whole = stack.forward(xs, nullptr, nullptr);
  auto state = stack.initial_state();
  for (int t = 0; t < 7; ++t) CHECK(stack.step(state, xs.row(t).transpose()) == whole.row(t).transpose());
  auto resumed = state;
  for (int t = 7; t < 12; ++t) CHECK(stack.step(resumed, xs.row(t).transpose()) == whole.row(t).transpose());
}

TEST_CASE("softmax cases") {
  CHECK(softmax(vec({0, 0})).isApprox(vec({0.5, 0.5})));
  const Vector big = softmax(vec({1000, 0}));
  CHECK(big(0) == doctest::Approx(1.0));
  CHECK(big(1) < 1e-300);
  CHECK(all_finite(big));
  const Vector q = softmax(vec({std::log(3.0), 0.0}));
  CHECK(q(0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(q(1) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(softmax(vec({std::nan(""), 0})), ContractError);
  CHECK_THROWS_AS(softmax(vec({1, 0}), 0), ContractError);
}

TEST_CASE("softmax sums to one for random finite inputs") {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    Vector v(7);
    for (auto& x : v) x = static_cast<Real>(rng.uniform(-50, 50));
    CHECK(std::abs(softmax(v, static_cast<Real>(rng.uniform(0.1, 3))).sum() - 1.0) < 1e-9);
  }
}

TEST_CASE("temperature divides logits") {
  const Vector a = softmax(vec({2, 1, 0}), 2);
  const Vector b = softmax(vec({1, 0.5, 0}));
  CHECK(a.isApprox(b, 1e-12));
}

TEST_CASE("log_add_exp") {
  CHECK(log_add_exp(0.0, 0.0) == doctest::Approx(std::log(2.0)));
  CHECK(log_add_exp(1000.0, 0.0) == doctest::Approx(1000.0));
  CHECK(log_add_exp(-1e30, 3.0) == 3.0);
}

TEST_CASE("Adam zero gradient leaves parameters unchanged") {
  Parameter p("p", 2, 2);
  p.value << 1, 2, 3, 4;
  const Matrix before = p.value;
  Adam adam({}, {1e-2, 0, 0, 1.0, 0.0});
  adam.update({&p});
  CHECK((p.value - before).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Adam first step moves by lr against the gradient sign") {
  Parameter p("p", 1, 3);
  p.grad << 0.5, -3.0, 1e-3;
  const double lr = 0.01;
  Adam adam({0.9, 0.999, 1e-8}, {lr, 0, 0, 1.0, 0.0});
  adam.update({&p});
  CHECK(p.value(0, 0) == doctest::Approx(-lr).epsilon(1e-6));
  CHECK(p.value(0, 1) == doctest::Approx(lr).epsilon(1e-6));
  CHECK(p.value(0, 2) == doctest::Approx(-lr).epsilon(1e-4));
}

TEST_CASE("Adam rejects mismatched gradient shapes") {
  Parameter p("p", 2, 2);
  p.grad = Matrix::Zero(3, 1);
  Adam adam({}, {});
  CHECK_THROWS_AS(adam.update({&p}), ContractError);
}

TEST_CASE("warmup hold decay schedule") {
  const LrSchedule s{1.0, 10, 10, 0.5, 0.01};
  CHECK(s.lr_at(5) == doctest::Approx(0.5));
  CHECK(s.lr_at(10) == doctest::Approx(1.0));
  CHECK(s.lr_at(20) == doctest::Approx(1.0));
  CHECK(s.lr_at(21) == doctest::Approx(0.5));
  CHECK(s.lr_at(1000) == doctest::Approx(0.01));
  double previous = 0.0;
  for (int step = 1; step <= 10; ++step) {
    CHECK(s.lr_at(step) >= previous);
    previous = s.lr_at(step);
  }
  for (int step = 21; step <= 40; ++step) CHECK(s.lr_at(step) <= s.lr_at(step - 1));
}

TEST_CASE("glorot init bounds and forget bias") {
  LstmLayer layer("l", 6, 4);
  Rng rng(3);
  layer.init(rng);
  const double bound = std::sqrt(6.0 / (6 + 16));
  CHECK(layer.w_x().value.cwiseAbs().maxCoeff() <= bound);
  CHECK(layer.bias().value.block(4, 0, 4, 1).isOnes());
  CHECK(layer.bias().value.block(0, 0, 4, 1).isZero());
}

TEST_CASE("dropout mask is inverted and seeded") {
  Rng a(5), b(5);
  const Matrix m1 = dropout_mask(50, 40, 0.25, a);
  const Matrix m2 = dropout_mask(50, 40, 0.25, b);
  CHECK(m1 == m2);
  for (Eigen::Index i = 0; i < m1.size(); ++i) {
    const double v = m1.data()[i];
    CHECK((v == 0.0 || std::abs(v - 1.0 / 0.75) < 1e-12));
  }
  const double kept = (m1.array() > 0).cast<double>().mean();
  CHECK(kept == doctest::Approx(0.75).epsilon(0.05));
}

TEST_CASE("dense and embedding gradients by linearity") {
  Dense dense("d", 3, 2);
  Rng rng(8);
  dense.init(rng);
  const Matrix xs = random_matrix(4, 3, 2);
  const Matrix dy = random_matrix(4, 2, 3);
  dense.backward_rows(xs, dy);
  const Matrix once = dense.weight().grad;
  dense.weight().zero_grad();
  dense.backward_rows(xs, 2 * dy);
  CHECK(dense.weight().grad.isApprox(2 * once));
}

TEST_CASE("checkpoint round trip keeps float32 values and validates shapes") {
  const auto dir = std::filesystem::temp_directory_path() / "rnntlid_kernel_test";
  std::filesystem::create_directories(dir);
  LstmStack stack("s", 3, 4, 2);
  Rng rng(1);
  stack.init(rng);
  Envelope env;
  env.kind = "test";
  env.config_text = "alpha = 1\n";
  env.tensors = snapshot(stack.parameters());
  save_envelope(dir / "ck.bin", env);
  const Envelope back = load_envelope(dir / "ck.bin");
  CHECK(back.kind == "test");
  CHECK(back.config_text == env.config_text);
  LstmStack other("s", 3, 4, 2);
  restore(other.parameters(), back.tensors);
  const auto a = stack.parameters();
  const auto b = other.parameters();
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(b[i]->value == a[i]->value.cast<float>().cast<Real>());
  LstmStack wrong("s", 3, 5, 2);
  CHECK_THROWS_AS(restore(wrong.parameters(), back.tensors), ContractError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("rng is reproducible and forks are independent") {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(42);
  Rng child(c.fork());
  CHECK(child.next_u64() != Rng(42).next_u64());
}
