#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "symreg/expr.hpp"
#include "symreg/random.hpp"

namespace symreg {

/// Sampling interval per input dimension. Codes are stored in corpus files.
enum class Interval : std::uint8_t {
  Full = 0,      // [-5, 5]
  Positive = 1,  // (0, 5]
  Negative = 2,  // [-5, 0)
};

std::string_view interval_name(Interval interval);

struct PointSet {
  Eigen::MatrixXd inputs;   // n_points x n_dims
  Eigen::VectorXd outputs;  // n_points
  std::vector<Interval> intervals;

  std::size_t size() const noexcept { return static_cast<std::size_t>(outputs.size()); }
  int dims() const noexcept { return static_cast<int>(inputs.cols()); }
};

enum class RejectReason : std::uint8_t {
  ValuesTooLarge,
  ConstantOutOfRange,
  IsLinear,
  IsConstant,
  TooManyTokens,
  NoFinitePoints,
  FoldError,
};

inline constexpr RejectReason kAllRejectReasons[] = {
    RejectReason::ValuesTooLarge, RejectReason::ConstantOutOfRange, RejectReason::IsLinear,
    RejectReason::IsConstant,     RejectReason::TooManyTokens,      RejectReason::NoFinitePoints,
    RejectReason::FoldError,
};

std::string_view reject_reason_name(RejectReason reason);

struct Rejected {
  RejectReason reason;
};

struct SamplingPolicy {
  int dims = 1;
  int points_1d = 100;
  int points_2d = 200;
  double max_abs_value = 1e7;
  /// Redraws of an exact zero when sampling (0, 5].
  int zero_redraw_limit = 100;

  int point_count() const noexcept { return dims == 1 ? points_1d : points_2d; }
  /// Interval assignments in priority order: for one dimension [-5,5], (0,5],
  /// [-5,0); for two dimensions the products ordered by the most restrictive
  /// component first, then by how many dimensions are restricted.
  std::vector<std::vector<Interval>> candidates() const;
};

/// Uniform draws on one interval, honouring open endpoints.
double draw_in(Interval interval, Rng& rng, int zero_redraw_limit = 100);

/// Fresh uniform points for every candidate assignment; the first one whose
/// evaluation is entirely finite and within max_abs_value wins.
std::variant<PointSet, Rejected> sample_points(const Expression& expr, const SamplingPolicy& policy, Rng& rng);

struct AcceptDecision {
  bool accepted = true;
  std::optional<RejectReason> reason;

  explicit operator bool() const noexcept { return accepted; }
};

inline constexpr std::size_t kMaxTokens = 50;

/// Structural filters only: IsConstant, IsLinear, TooManyTokens, ConstantOutOfRange.
AcceptDecision accept_structure(const Expression& expr, std::size_t max_tokens = kMaxTokens);
/// Structural filters plus the point-set filters (NoFinitePoints, ValuesTooLarge,
/// and IsConstant for numerically flat outputs).
AcceptDecision accept(const Expression& expr, const PointSet& points, std::size_t max_tokens = kMaxTokens,
                      double max_abs_value = 1e7);

}  // namespace symreg
