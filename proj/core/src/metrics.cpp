#include "symreg/metrics.hpp"

#include <cmath>

#include "symreg/errors.hpp"

namespace symreg {

namespace {

void check_lengths(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  if (y.size() != yhat.size()) fail(ErrorCode::InvalidArgument, "metric inputs differ in length");
}

}  // namespace

Metric relative_error(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  check_lengths(y, yhat);
  Metric m;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0 || !std::isfinite(y[i]) || !std::isfinite(yhat[i])) continue;
    sum += std::abs(y[i] - yhat[i]) / std::abs(y[i]);
    ++m.included;
  }
  if (m.included > 0) m.value = sum / static_cast<double>(m.included);
  return m;
}

Metric r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  check_lengths(y, yhat);
  Metric m;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i]) || !std::isfinite(yhat[i])) continue;
    sum += y[i];
    ++m.included;
  }
  if (m.included < 2) return m;
  const double mean = sum / static_cast<double>(m.included);
  double ss_res = 0.0, ss_tot = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i]) || !std::isfinite(yhat[i])) continue;
    ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (ss_tot == 0.0) return m;
  m.value = 1.0 - ss_res / ss_tot;
  return m;
}

}  // namespace symreg
