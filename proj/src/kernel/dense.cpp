#include "rnntlid/kernel/dense.hpp"

namespace rnntlid {

Dense::Dense(const std::string& name, int input_dim, int output_dim)
    : weight_(name + ".weight", output_dim, input_dim), bias_(name + ".bias", output_dim, 1) {}

void Dense::init(Rng& rng) {
  weight_.init_glorot(rng);
  bias_.value.setZero();
}

Vector Dense::forward(const Vector& x) const {
  require(x.size() == input_dim(), "dense input dimension mismatch");
  Vector y = weight_.value * x;
  y += bias_.value.col(0);
  return y;
}

Matrix Dense::forward_rows(const Matrix& xs) const {
  Matrix ys(xs.rows(), output_dim());
  for (Eigen::Index r = 0; r < xs.rows(); ++r) ys.row(r) = forward(xs.row(r).transpose()).transpose();
  return ys;
}

Matrix Dense::backward_rows(const Matrix& xs, const Matrix& d_ys) {
  weight_.grad.noalias() += d_ys.transpose() * xs;
  bias_.grad.col(0) += d_ys.colwise().sum().transpose();
  return d_ys * weight_.value;
}

Embedding::Embedding(const std::string& name, int rows, int dim) : table_(name + ".table", rows, dim) {}

void Embedding::init(Rng& rng) { table_.init_glorot(rng); }

Vector Embedding::lookup(int row) const {
  require(row >= 0 && row < rows(), "embedding row out of range");
  return table_.value.row(row).transpose();
}

void Embedding::accumulate_grad(int row, const Vector& d) { table_.grad.row(row) += d.transpose(); }

}  // namespace rnntlid
