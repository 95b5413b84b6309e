#pragma once

#include <string>

#include "rnntlid/kernel/param.hpp"

namespace rnntlid {

// y = W x + b.
class Dense {
 public:
  Dense() = default;
  Dense(const std::string& name, int input_dim, int output_dim);

  int input_dim() const { return static_cast<int>(weight_.value.cols()); }
  int output_dim() const { return static_cast<int>(weight_.value.rows()); }

  Vector forward(const Vector& x) const;
  // Row-wise application; rows are independent GEMVs so row t of the
  // result never depends on other rows.
  Matrix forward_rows(const Matrix& xs) const;
  // Accumulates weight/bias gradients; returns dL/dX.
  Matrix backward_rows(const Matrix& xs, const Matrix& d_ys);

  void init(Rng& rng);
  ParameterList parameters() { return {&weight_, &bias_}; }
  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  Parameter weight_;
  Parameter bias_;
};

// Lookup table with one row per id.
class Embedding {
 public:
  Embedding() = default;
  Embedding(const std::string& name, int rows, int dim);

  int rows() const { return static_cast<int>(table_.value.rows()); }
  int dim() const { return static_cast<int>(table_.value.cols()); }
  Vector lookup(int row) const;
  void accumulate_grad(int row, const Vector& d);

  void init(Rng& rng);
  ParameterList parameters() { return {&table_}; }
  Parameter& table() { return table_; }

 private:
  Parameter table_;
};

}  // namespace rnntlid
