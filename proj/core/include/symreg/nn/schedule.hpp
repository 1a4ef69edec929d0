#pragma once

#include <cstdint>

namespace symreg::nn {

struct ScheduleConfig {
  std::int64_t total_steps = 1;
  /// Steps during which the regression weight stays at zero.
  std::int64_t lambda_delay = 0;
  double sigma0 = 0.1;
  std::int64_t warmup_steps = 1000;
  int model_dim = 64;
  double lr_divisor = 5.0;
  /// Schedules are piecewise constant over blocks of this many steps.
  std::int64_t block = 1;
};

/// Regression weight, constant-noise level and learning rate as functions of
/// the optimizer step.
class TrainSchedule {
 public:
  explicit TrainSchedule(ScheduleConfig config);

  /// Block granularity derived from the dataset: about 128 updates per epoch.
  static std::int64_t block_for(std::int64_t steps_per_epoch);

  const ScheduleConfig& config() const noexcept { return config_; }
  /// 0 up to the delay, then a cosine ramp reaching 1 at total_steps.
  double lambda(std::int64_t step) const;
  /// Cosine decay from sigma0 to 0 at total_steps.
  double sigma(std::int64_t step) const;
  /// Inverse-square-root schedule with linear warmup, divided by lr_divisor.
  double learning_rate(std::int64_t step) const;

 private:
  std::int64_t quantize(std::int64_t step) const;
  ScheduleConfig config_;
};

}  // namespace symreg::nn
