#pragma once

#include <string>
#include <vector>

#include "rnntlid/kernel/rng.hpp"
#include "rnntlid/kernel/tensor.hpp"

namespace rnntlid {

// A trainable tensor with its gradient accumulator. Vectors (biases) are
// stored as n x 1 matrices so every parameter shares one representation.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Matrix::Zero(rows, cols)), grad(Matrix::Zero(rows, cols)) {}

  // Uniform in [-s, s], s = sqrt(6 / (fan_in + fan_out)).
  void init_glorot(Rng& rng);
  void zero_grad() { grad.setZero(); }
};

using ParameterList = std::vector<Parameter*>;

void zero_grads(const ParameterList& params);
double grad_norm(const ParameterList& params);
void scale_grads(const ParameterList& params, double factor);
// Copies values for every parameter in `dst` whose name exists in `src`.
// Returns how many were copied; shapes must agree.
std::size_t copy_by_name(const ParameterList& src, const ParameterList& dst);
Parameter* find_parameter(const ParameterList& params, const std::string& name);

}  // namespace rnntlid
