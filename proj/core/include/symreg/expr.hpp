#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace symreg {

/// Every operator the toolkit knows. The generator draws from the full set;
/// the model vocabulary only contains the ones for which `in_vocabulary` holds
/// and `normalize` rewrites the rest away.
enum class Op : std::uint8_t {
  Add, Mul, Pow,
  Sub, Div,
  Sqrt, Pow2, Pow3, Ln, Exp, Sin, Cos, Tan, Cot, Asin, Acos, Atan, Acot, Neg,
  Inv, Pow4, Pow5, Pow6,
};

inline constexpr Op kAllOps[] = {
    Op::Add,  Op::Mul,  Op::Pow, Op::Sub,  Op::Div,  Op::Sqrt, Op::Pow2, Op::Pow3,
    Op::Ln,   Op::Exp,  Op::Sin, Op::Cos,  Op::Tan,  Op::Cot,  Op::Asin, Op::Acos,
    Op::Atan, Op::Acot, Op::Neg, Op::Inv,  Op::Pow4, Op::Pow5, Op::Pow6,
};

int arity(Op op);
bool in_vocabulary(Op op);
/// Token spelling ("+", "mul", "pow", "sqrt", ...).
std::string_view op_name(Op op);
std::optional<Op> op_from_name(std::string_view name);

enum class NodeKind : std::uint8_t { Binary, Unary, Variable, Integer, Constant };

inline constexpr int kMinIntegerLeaf = -5;
inline constexpr int kMaxIntegerLeaf = 5;
inline constexpr double kMinConstantMagnitude = 1e-10;
inline constexpr double kMaxConstantMagnitude = 1e10;

/// Immutable expression tree with value semantics.
class Expression {
 public:
  static Expression binary(Op op, Expression lhs, Expression rhs);
  static Expression unary(Op op, Expression child);
  static Expression variable(int index);
  static Expression integer(int value);
  static Expression constant(double value);

  NodeKind kind() const noexcept { return kind_; }
  Op op() const noexcept { return op_; }
  int variable_index() const noexcept { return ivalue_; }
  int integer_value() const noexcept { return ivalue_; }
  double constant_value() const noexcept { return value_; }

  bool is_leaf() const noexcept { return children_.empty(); }
  const std::vector<Expression>& children() const noexcept { return children_; }
  const Expression& child(std::size_t i) const { return children_.at(i); }

  /// Number of nodes (equals the number of preorder tokens).
  std::size_t size() const noexcept;

  /// Exact structural and value equality.
  friend bool operator==(const Expression& a, const Expression& b);

 private:
  Expression() = default;

  NodeKind kind_ = NodeKind::Integer;
  Op op_ = Op::Add;
  int ivalue_ = 0;
  double value_ = 0.0;
  std::vector<Expression> children_;
};

/// Same shape, operators, variables and integers; constants within `rel_tol`.
bool structurally_equal(const Expression& a, const Expression& b, double rel_tol = 1e-12);

bool has_variables(const Expression& e);
/// -1 when the expression has no variables.
int max_variable_index(const Expression& e);
std::size_t count_operators(const Expression& e);

/// Constant leaf values in preorder.
std::vector<double> constant_values(const Expression& e);
/// Copy of `e` with constant leaves replaced, in preorder.
Expression with_constant_values(const Expression& e, std::span<const double> values);

/// Throws InvalidArgument if arity, leaf ranges or variable indices are violated.
void validate(const Expression& e, int dims);

/// Human-readable infix form; `parse_infix` reads it back.
std::string to_infix(const Expression& e);
/// Preorder token spelling, e.g. "+ mul x 0.017 1781.5".
std::string to_prefix(const Expression& e);

/// Infix parser: numbers, x, y, pi, + - * / ^, unary minus, and calls to any
/// unary operator name (plus `log` as an alias for `ln`). Integer literals in
/// [-5, 5] become integer leaves, other numbers constant leaves.
Expression parse_infix(std::string_view text);

}  // namespace symreg
