#include "symreg/normalize.hpp"

#include <cmath>
#include <limits>

#include "symreg/errors.hpp"
#include "symreg/eval.hpp"

namespace symreg {

Expression rewrite_to_vocabulary(const Expression& expr) {
  switch (expr.kind()) {
    case NodeKind::Binary: {
      auto lhs = rewrite_to_vocabulary(expr.child(0));
      auto rhs = rewrite_to_vocabulary(expr.child(1));
      switch (expr.op()) {
        case Op::Sub:
          return Expression::binary(Op::Add, std::move(lhs), Expression::unary(Op::Neg, std::move(rhs)));
        case Op::Div:
          return Expression::binary(Op::Mul, std::move(lhs),
                                    Expression::binary(Op::Pow, std::move(rhs), Expression::integer(-1)));
        default:
          return Expression::binary(expr.op(), std::move(lhs), std::move(rhs));
      }
    }
    case NodeKind::Unary: {
      auto child = rewrite_to_vocabulary(expr.child(0));
      switch (expr.op()) {
        case Op::Inv: return Expression::binary(Op::Pow, std::move(child), Expression::integer(-1));
        case Op::Pow4: return Expression::binary(Op::Pow, std::move(child), Expression::integer(4));
        case Op::Pow5: return Expression::binary(Op::Pow, std::move(child), Expression::integer(5));
        case Op::Pow6: return Expression::binary(Op::Pow, std::move(child), Expression::constant(6.0));
        default: return Expression::unary(expr.op(), std::move(child));
      }
    }
    default:
      return expr;
  }
}

namespace {

Expression fold_value(double v) {
  if (!std::isfinite(v)) fail(ErrorCode::FoldError, "folded value is not finite");
  if (v == std::nearbyint(v) && v >= kMinIntegerLeaf && v <= kMaxIntegerLeaf) {
    return Expression::integer(static_cast<int>(v));
  }
  const double mag = std::abs(v);
  if (mag < kMinConstantMagnitude || mag > kMaxConstantMagnitude) {
    fail(ErrorCode::FoldError, "folded constant magnitude outside [1e-10, 1e10]");
  }
  return Expression::constant(v);
}

bool is_integer_leaf(const Expression& e, int value) {
  return e.kind() == NodeKind::Integer && e.integer_value() == value;
}

Expression fold(const Expression& expr) {
  if (expr.is_leaf()) {
    if (expr.kind() == NodeKind::Constant) return fold_value(expr.constant_value());
    return expr;
  }
  if (!has_variables(expr)) return fold_value(evaluate_at(expr, {}));

  if (expr.kind() == NodeKind::Unary) {
    auto child = fold(expr.child(0));
    if (expr.op() == Op::Neg && child.kind() == NodeKind::Unary && child.op() == Op::Neg) {
      return child.child(0);
    }
    return Expression::unary(expr.op(), std::move(child));
  }

  auto lhs = fold(expr.child(0));
  auto rhs = fold(expr.child(1));
  switch (expr.op()) {
    case Op::Add:
      if (is_integer_leaf(rhs, 0)) return lhs;
      if (is_integer_leaf(lhs, 0)) return rhs;
      break;
    case Op::Mul:
      if (is_integer_leaf(rhs, 1)) return lhs;
      if (is_integer_leaf(lhs, 1)) return rhs;
      break;
    case Op::Pow:
      if (is_integer_leaf(rhs, 1)) return lhs;
      break;
    default:
      break;
  }
  return Expression::binary(expr.op(), std::move(lhs), std::move(rhs));
}

// Polynomial degree, or -1 when the expression is not a polynomial.
int degree(const Expression& e) {
  switch (e.kind()) {
    case NodeKind::Variable: return 1;
    case NodeKind::Integer:
    case NodeKind::Constant: return 0;
    case NodeKind::Unary: {
      const int d = degree(e.child(0));
      if (d < 0) return -1;
      if (d == 0) return 0;
      switch (e.op()) {
        case Op::Neg: return d;
        case Op::Pow2: return 2 * d;
        case Op::Pow3: return 3 * d;
        case Op::Pow4: return 4 * d;
        case Op::Pow5: return 5 * d;
        case Op::Pow6: return 6 * d;
        default: return -1;
      }
    }
    case NodeKind::Binary: {
      const int a = degree(e.child(0));
      const int b = degree(e.child(1));
      if (a < 0 || b < 0) return -1;
      switch (e.op()) {
        case Op::Add:
        case Op::Sub: return std::max(a, b);
        case Op::Mul: return a + b;
        case Op::Div: return b == 0 ? a : -1;
        case Op::Pow: {
          if (a == 0 && b == 0) return 0;
          if (b != 0) return -1;
          const auto& ex = e.child(1);
          if (ex.kind() == NodeKind::Integer && ex.integer_value() >= 0) return a * ex.integer_value();
          return -1;
        }
        default: return -1;
      }
    }
  }
  return -1;
}

}  // namespace

Expression fold_constants(const Expression& expr) { return fold(expr); }

Expression normalize(const Expression& expr) { return fold(rewrite_to_vocabulary(expr)); }

Complexity complexity(const Expression& expr) {
  Complexity c;
  c.token_count = expr.size();
  c.is_constant = !has_variables(expr);
  const int d = degree(expr);
  c.is_linear = d >= 0 && d <= 1;
  return c;
}

}  // namespace symreg
