#include "rnntlid/kernel/adam.hpp"

#include <algorithm>
#include <cmath>

namespace rnntlid {

double LrSchedule::lr_at(std::int64_t step) const {
  if (warmup_steps > 0 && step <= warmup_steps)
    return peak_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  if (step <= warmup_steps + hold_steps) return peak_lr;
  const auto decay_steps = static_cast<double>(step - warmup_steps - hold_steps);
  return std::max(min_lr, peak_lr * std::pow(decay_rate, decay_steps));
}

void Adam::update(const ParameterList& params) {
  if (m_.empty()) {
    for (const auto* p : params) {
      m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
  require(m_.size() == params.size(), "Adam parameter list changed between updates");
  for (const auto* p : params) {
    require(p->grad.rows() == p->value.rows() && p->grad.cols() == p->value.cols(),
            "gradient shape mismatch for " + p->name);
  }

  ++step_;
  const double lr = schedule_.lr_at(step_);
  const double correction1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  const auto b1 = static_cast<Real>(config_.beta1);
  const auto b2 = static_cast<Real>(config_.beta2);

  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    m_[k] = b1 * m_[k] + (Real(1) - b1) * p.grad;
    v_[k] = b2 * v_[k] + (Real(1) - b2) * p.grad.cwiseProduct(p.grad);
    const auto m_hat = m_[k].array() / static_cast<Real>(correction1);
    const auto v_hat = v_[k].array() / static_cast<Real>(correction2);
    p.value.array() -= static_cast<Real>(lr) * m_hat / (v_hat.sqrt() + static_cast<Real>(config_.epsilon));
  }
}

}  // namespace rnntlid
