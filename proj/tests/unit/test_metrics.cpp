#include <doctest.h>

#include <limits>
#include <random>

#include "oracles.hpp"
#include "symreg/metrics.hpp"

using namespace symreg;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("relative error examples") {
    CHECK(*relative_error(vec({1, 2, 3}), vec({1, 2, 3})).value == 0.0);
    const auto m = relative_error(vec({1, 2}), vec({2, 2}));
    CHECK(*m.value == 0.5);
    CHECK(m.included == 2);
    CHECK_FALSE(relative_error(vec({0}), vec({1})).defined());
    const double inf = std::numeric_limits<double>::infinity();
    const auto skip = relative_error(vec({0, 2, 4, 1}), vec({5, 3, inf, 1}));
    CHECK(skip.included == 2);
    CHECK(*skip.value == doctest::Approx(0.25));
  }

  TEST_CASE("r squared examples") {
    CHECK(*r_squared(vec({1, 2, 3}), vec({1, 2, 3})).value == 1.0);
    CHECK(*r_squared(vec({1, 2, 3}), vec({2, 2, 2})).value == 0.0);
    CHECK(*r_squared(vec({1, 2, 3}), vec({1, 2, 4})).value == doctest::Approx(0.5));
    CHECK_FALSE(r_squared(vec({2, 2, 2}), vec({1, 2, 3})).defined());
    CHECK_FALSE(r_squared(vec({1}), vec({1})).defined());
    CHECK(*r_squared(vec({1, 2, 3, 5}), vec({1, 2, std::nan(""), 5})).value == 1.0);
  }

  TEST_CASE("agreement with the extended-precision oracle") {
    std::mt19937_64 gen(1);
    std::normal_distribution<double> n;
    for (int t = 0; t < 50; ++t) {
      Eigen::VectorXd y(30), yh(30);
      std::vector<long double> ly, lyh;
      for (int i = 0; i < 30; ++i) {
        y[i] = n(gen) * 10;
        yh[i] = y[i] + n(gen);
        ly.push_back(y[i]);
        lyh.push_back(yh[i]);
      }
      CHECK(*r_squared(y, yh).value == doctest::Approx(static_cast<double>(oracle::r_squared(ly, lyh))).epsilon(1e-12));
      const double mean = y.mean();
      CHECK(*r_squared(y, Eigen::VectorXd::Constant(30, mean)).value == doctest::Approx(0.0).epsilon(1e-12));
    }
  }
}
