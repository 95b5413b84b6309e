#pragma once

#include <cstdint>
#include <vector>

#include "rnntlid/kernel/param.hpp"

namespace rnntlid {

// Linear warmup to peak_lr, constant hold, then per-step exponential decay
// floored at min_lr.
struct LrSchedule {
  double peak_lr = 1e-3;
  std::int64_t warmup_steps = 0;
  std::int64_t hold_steps = 0;
  double decay_rate = 1.0;  // multiplicative factor per decay step
  double min_lr = 0.0;

  // `step` is 1-based: the LR applied by the step-th update.
  double lr_at(std::int64_t step) const;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(AdamConfig config, LrSchedule schedule) : config_(config), schedule_(schedule) {}

  // Applies one bias-corrected Adam update using each parameter's grad.
  // Moment buffers are bound to parameter order on the first call.
  void update(const ParameterList& params);

  std::int64_t step() const { return step_; }
  double current_lr() const { return schedule_.lr_at(step_ < 1 ? 1 : step_); }
  const LrSchedule& schedule() const { return schedule_; }

 private:
  AdamConfig config_;
  LrSchedule schedule_;
  std::int64_t step_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace rnntlid
