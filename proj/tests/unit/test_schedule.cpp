#include <doctest.h>

#include <cmath>

#include "symreg/nn/schedule.hpp"

using namespace symreg::nn;

TEST_SUITE("schedule") {
  TEST_CASE("endpoints") {
    ScheduleConfig c;
    c.total_steps = 1000;
    c.lambda_delay = 250;
    c.block = 8;
    const TrainSchedule s(c);
    CHECK(s.lambda(0) == 0.0);
    CHECK(s.lambda(250) == 0.0);
    CHECK(s.lambda(1000) == 1.0);
    CHECK(s.sigma(0) == 0.1);
    CHECK(s.sigma(1000) == 0.0);
    CHECK(s.lambda(999) < 1.0);
    CHECK(s.lambda(999) > 0.99);
  }

  TEST_CASE("monotone ramps") {
    ScheduleConfig c;
    c.total_steps = 5000;
    c.lambda_delay = 1000;
    c.block = 1;
    const TrainSchedule s(c);
    for (std::int64_t t = 1; t <= 5000; ++t) {
      CHECK(s.lambda(t) >= s.lambda(t - 1));
      CHECK(s.sigma(t) <= s.sigma(t - 1));
    }
    // Halfway through the ramp the cosine sits at one half.
    CHECK(s.lambda(3000) == doctest::Approx(0.5));
    CHECK(s.sigma(2500) == doctest::Approx(0.05));
  }

  TEST_CASE("block quantization") {
    CHECK(TrainSchedule::block_for(1) == 1);
    CHECK(TrainSchedule::block_for(128) == 1);
    CHECK(TrainSchedule::block_for(129) == 2);
    CHECK(TrainSchedule::block_for(6250) == 49);
    ScheduleConfig c;
    c.total_steps = 1000;
    c.block = 10;
    const TrainSchedule s(c);
    for (std::int64_t t = 0; t < 10; ++t) CHECK(s.sigma(t) == s.sigma(0));
    CHECK(s.sigma(10) < s.sigma(9));
  }

  TEST_CASE("learning rate warmup") {
    ScheduleConfig c;
    c.total_steps = 100000;
    c.warmup_steps = 1000;
    c.model_dim = 64;
    c.lr_divisor = 5.0;
    const TrainSchedule s(c);
    const double peak = 1.0 / std::sqrt(1000.0) / 8.0 / 5.0;
    CHECK(s.learning_rate(1000) == doctest::Approx(peak));
    CHECK(s.learning_rate(500) == doctest::Approx(peak / 2));
    CHECK(s.learning_rate(4000) == doctest::Approx(peak / 2));
    CHECK(s.learning_rate(0) > 0.0);
  }
}
