#include "rnntlid/kernel/param.hpp"

#include <cmath>

namespace rnntlid {

void Parameter::init_glorot(Rng& rng) {
  const double s = std::sqrt(6.0 / static_cast<double>(value.rows() + value.cols()));
  for (Eigen::Index r = 0; r < value.rows(); ++r)
    for (Eigen::Index c = 0; c < value.cols(); ++c)
      value(r, c) = static_cast<Real>(rng.uniform(-s, s));
}

void zero_grads(const ParameterList& params) {
  for (auto* p : params) p->zero_grad();
}

double grad_norm(const ParameterList& params) {
  double sum = 0.0;
  for (const auto* p : params) sum += static_cast<double>(p->grad.squaredNorm());
  return std::sqrt(sum);
}

void scale_grads(const ParameterList& params, double factor) {
  for (auto* p : params) p->grad *= static_cast<Real>(factor);
}

Parameter* find_parameter(const ParameterList& params, const std::string& name) {
  for (auto* p : params)
    if (p->name == name) return p;
  return nullptr;
}

std::size_t copy_by_name(const ParameterList& src, const ParameterList& dst) {
  std::size_t copied = 0;
  for (auto* d : dst) {
    const Parameter* s = find_parameter(src, d->name);
    if (s == nullptr) continue;
    require(s->value.rows() == d->value.rows() && s->value.cols() == d->value.cols(),
            "shape mismatch copying parameter " + d->name);
    d->value = s->value;
    ++copied;
  }
  return copied;
}

}  // namespace rnntlid
