#include "symreg/nn/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "symreg/errors.hpp"

namespace symreg::nn {

TrainSchedule::TrainSchedule(ScheduleConfig config) : config_(config) {
  if (config_.total_steps < 1 || config_.lambda_delay < 0 || config_.lambda_delay >= config_.total_steps ||
      config_.sigma0 < 0 || config_.warmup_steps < 1 || config_.model_dim < 1 || config_.lr_divisor <= 0 ||
      config_.block < 1) {
    fail(ErrorCode::InvalidArgument, "invalid training schedule");
  }
}

std::int64_t TrainSchedule::block_for(std::int64_t steps_per_epoch) {
  return std::max<std::int64_t>(1, (steps_per_epoch + 127) / 128);
}

std::int64_t TrainSchedule::quantize(std::int64_t step) const {
  return step - step % config_.block;
}

double TrainSchedule::lambda(std::int64_t step) const {
  if (step >= config_.total_steps) return 1.0;
  const std::int64_t t = quantize(std::max<std::int64_t>(step, 0));
  if (t <= config_.lambda_delay) return 0.0;
  const double frac = static_cast<double>(t - config_.lambda_delay) /
                      static_cast<double>(config_.total_steps - config_.lambda_delay);
  return 0.5 * (1.0 - std::cos(std::numbers::pi * frac));
}

double TrainSchedule::sigma(std::int64_t step) const {
  if (step >= config_.total_steps) return 0.0;
  const std::int64_t t = quantize(std::max<std::int64_t>(step, 0));
  const double frac = static_cast<double>(t) / static_cast<double>(config_.total_steps);
  return config_.sigma0 * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
}

double TrainSchedule::learning_rate(std::int64_t step) const {
  const double s = static_cast<double>(std::max<std::int64_t>(1, quantize(std::max<std::int64_t>(step, 0))));
  const double w = static_cast<double>(config_.warmup_steps);
  const double base = std::min(1.0 / std::sqrt(s), s * std::pow(w, -1.5));
  return base / std::sqrt(static_cast<double>(config_.model_dim)) / config_.lr_divisor;
}

}  // namespace symreg::nn
