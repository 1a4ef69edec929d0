#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <optional>

namespace symreg {

/// Metric value plus the number of point pairs that entered it. `value` is
/// empty when the metric is undefined for the given data.
struct Metric {
  std::optional<double> value;
  std::size_t included = 0;

  bool defined() const noexcept { return value.has_value(); }
};

/// Mean of |y - yhat| / |y|, skipping pairs with y = 0 or a non-finite entry.
Metric relative_error(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

/// 1 - SS_res / SS_tot over finite pairs; undefined with fewer than two pairs
/// or zero variance of y.
Metric r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

}  // namespace symreg
