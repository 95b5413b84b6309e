#pragma once

#include "rnntlid/kernel/tensor.hpp"

namespace rnntlid {

inline Real sigmoid(Real x) { return Real(1) / (Real(1) + std::exp(-x)); }

// Softmax of logits / temperature with max subtraction. Throws on
// non-finite logits or non-positive temperature.
Vector softmax(const Vector& logits, Real temperature = 1);
Vector log_softmax(const Vector& logits, Real temperature = 1);

// log(exp(a) + exp(b)) without overflow.
double log_add_exp(double a, double b);

}  // namespace rnntlid
