#include "symreg/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "symreg/errors.hpp"
#include "symreg/eval.hpp"
#include "symreg/normalize.hpp"

namespace symreg {

std::string_view interval_name(Interval interval) {
  switch (interval) {
    case Interval::Full: return "[-5,5]";
    case Interval::Positive: return "(0,5]";
    case Interval::Negative: return "[-5,0)";
  }
  return "?";
}

std::string_view reject_reason_name(RejectReason reason) {
  switch (reason) {
    case RejectReason::ValuesTooLarge: return "ValuesTooLarge";
    case RejectReason::ConstantOutOfRange: return "ConstantOutOfRange";
    case RejectReason::IsLinear: return "IsLinear";
    case RejectReason::IsConstant: return "IsConstant";
    case RejectReason::TooManyTokens: return "TooManyTokens";
    case RejectReason::NoFinitePoints: return "NoFinitePoints";
    case RejectReason::FoldError: return "FoldError";
  }
  return "?";
}

std::vector<std::vector<Interval>> SamplingPolicy::candidates() const {
  using I = Interval;
  if (dims == 1) return {{I::Full}, {I::Positive}, {I::Negative}};
  if (dims == 2) {
    return {
        {I::Full, I::Full},         {I::Positive, I::Full},     {I::Full, I::Positive},
        {I::Positive, I::Positive}, {I::Negative, I::Full},     {I::Full, I::Negative},
        {I::Negative, I::Positive}, {I::Positive, I::Negative}, {I::Negative, I::Negative},
    };
  }
  fail(ErrorCode::InvalidArgument, "sampling supports 1 or 2 dimensions");
}

double draw_in(Interval interval, Rng& rng, int zero_redraw_limit) {
  switch (interval) {
    case Interval::Full:
      return uniform(rng, -5.0, 5.0);
    case Interval::Positive: {
      // 5 - u with u in [0, 5) lands in (0, 5]; the loop only guards rounding.
      for (int attempt = 0; attempt <= zero_redraw_limit; ++attempt) {
        const double v = 5.0 - uniform(rng, 0.0, 5.0);
        if (v > 0.0) return v;
      }
      return 5.0;
    }
    case Interval::Negative:
      return uniform(rng, -5.0, 0.0);
  }
  return 0.0;
}

std::variant<PointSet, Rejected> sample_points(const Expression& expr, const SamplingPolicy& policy, Rng& rng) {
  const CompiledExpression compiled(expr);
  if (compiled.required_dims() > policy.dims) {
    fail(ErrorCode::InvalidArgument, "expression uses more variables than the sampling policy");
  }
  const int n = policy.point_count();
  bool saw_finite_but_large = false;
  std::vector<double> scratch;
  for (const auto& assignment : policy.candidates()) {
    PointSet ps;
    ps.intervals = assignment;
    ps.inputs.resize(n, policy.dims);
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < policy.dims; ++d) {
        ps.inputs(i, d) = draw_in(assignment[static_cast<std::size_t>(d)], rng, policy.zero_redraw_limit);
      }
    }
    ps.outputs = compiled.evaluate(ps.inputs, compiled.initial_constants());
    bool finite = true, small = true;
    for (int i = 0; i < n; ++i) {
      const double v = ps.outputs[i];
      if (!std::isfinite(v)) {
        finite = false;
        break;
      }
      if (std::abs(v) > policy.max_abs_value) small = false;
    }
    if (finite && small) return ps;
    saw_finite_but_large |= finite;
  }
  return Rejected{saw_finite_but_large ? RejectReason::ValuesTooLarge : RejectReason::NoFinitePoints};
}

AcceptDecision accept_structure(const Expression& expr, std::size_t max_tokens) {
  const auto c = complexity(expr);
  if (c.is_constant) return {false, RejectReason::IsConstant};
  if (c.is_linear) return {false, RejectReason::IsLinear};
  if (c.token_count > max_tokens) return {false, RejectReason::TooManyTokens};
  for (double v : constant_values(expr)) {
    const double mag = std::abs(v);
    if (!std::isfinite(v) || mag < kMinConstantMagnitude || mag > kMaxConstantMagnitude) {
      return {false, RejectReason::ConstantOutOfRange};
    }
  }
  return {};
}

AcceptDecision accept(const Expression& expr, const PointSet& points, std::size_t max_tokens, double max_abs_value) {
  if (auto s = accept_structure(expr, max_tokens); !s) return s;
  if (points.size() == 0) return {false, RejectReason::NoFinitePoints};
  const auto values = evaluate(expr, points.inputs);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || !std::isfinite(points.outputs[i])) return {false, RejectReason::NoFinitePoints};
  }
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (std::abs(values[i]) > max_abs_value || std::abs(points.outputs[i]) > max_abs_value) {
      return {false, RejectReason::ValuesTooLarge};
    }
  }
  // Structurally non-constant but numerically flat, e.g. x * pow(x, -1).
  const double lo = points.outputs.minCoeff();
  const double hi = points.outputs.maxCoeff();
  if (hi - lo <= 1e-9 * std::max(1.0, std::abs(hi))) return {false, RejectReason::IsConstant};
  return {};
}

}  // namespace symreg
