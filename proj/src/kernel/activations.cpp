#include "rnntlid/kernel/activations.hpp"

#include <cmath>

namespace rnntlid {

namespace {

Vector scaled_shifted(const Vector& logits, Real temperature) {
  require(temperature > 0, "softmax temperature must be positive");
  require(logits.size() > 0, "softmax of an empty vector");
  require(logits.allFinite(), "softmax received a non-finite logit");
  Vector z = logits / temperature;
  return z.array() - z.maxCoeff();
}

}  // namespace

Vector softmax(const Vector& logits, Real temperature) {
  Vector e = scaled_shifted(logits, temperature).array().exp();
  return e / e.sum();
}

Vector log_softmax(const Vector& logits, Real temperature) {
  Vector z = scaled_shifted(logits, temperature);
  const Real log_norm = std::log(z.array().exp().sum());
  return z.array() - log_norm;
}

double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -INFINITY) return a;
  return a + std::log1p(std::exp(b - a));
}

}  // namespace rnntlid
