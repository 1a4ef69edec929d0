#include "symreg/expr.hpp"

#include <cmath>
#include <utility>

#include "symreg/errors.hpp"

namespace symreg {

namespace {

struct OpInfo {
  Op op;
  std::string_view name;
  int arity;
  bool vocab;
};

constexpr OpInfo kOpTable[] = {
    {Op::Add, "+", 2, true},       {Op::Mul, "mul", 2, true},    {Op::Pow, "pow", 2, true},
    {Op::Sub, "sub", 2, false},    {Op::Div, "div", 2, false},   {Op::Sqrt, "sqrt", 1, true},
    {Op::Pow2, "pow2", 1, true},   {Op::Pow3, "pow3", 1, true},  {Op::Ln, "ln", 1, true},
    {Op::Exp, "exp", 1, true},     {Op::Sin, "sin", 1, true},    {Op::Cos, "cos", 1, true},
    {Op::Tan, "tan", 1, true},     {Op::Cot, "cot", 1, true},    {Op::Asin, "asin", 1, true},
    {Op::Acos, "acos", 1, true},   {Op::Atan, "atan", 1, true},  {Op::Acot, "acot", 1, true},
    {Op::Neg, "neg", 1, true},     {Op::Inv, "inv", 1, false},   {Op::Pow4, "pow4", 1, false},
    {Op::Pow5, "pow5", 1, false},  {Op::Pow6, "pow6", 1, false},
};

const OpInfo& info(Op op) { return kOpTable[static_cast<std::size_t>(op)]; }

}  // namespace

int arity(Op op) { return info(op).arity; }
bool in_vocabulary(Op op) { return info(op).vocab; }
std::string_view op_name(Op op) { return info(op).name; }

std::optional<Op> op_from_name(std::string_view name) {
  for (const auto& entry : kOpTable) {
    if (entry.name == name) return entry.op;
  }
  return std::nullopt;
}

Expression Expression::binary(Op op, Expression lhs, Expression rhs) {
  if (arity(op) != 2) fail(ErrorCode::InvalidArgument, "operator is not binary: " + std::string(op_name(op)));
  Expression e;
  e.kind_ = NodeKind::Binary;
  e.op_ = op;
  e.children_.reserve(2);
  e.children_.push_back(std::move(lhs));
  e.children_.push_back(std::move(rhs));
  return e;
}

Expression Expression::unary(Op op, Expression child) {
  if (arity(op) != 1) fail(ErrorCode::InvalidArgument, "operator is not unary: " + std::string(op_name(op)));
  Expression e;
  e.kind_ = NodeKind::Unary;
  e.op_ = op;
  e.children_.push_back(std::move(child));
  return e;
}

Expression Expression::variable(int index) {
  if (index < 0) fail(ErrorCode::InvalidArgument, "negative variable index");
  Expression e;
  e.kind_ = NodeKind::Variable;
  e.ivalue_ = index;
  return e;
}

Expression Expression::integer(int value) {
  if (value < kMinIntegerLeaf || value > kMaxIntegerLeaf) {
    fail(ErrorCode::InvalidArgument, "integer leaf outside [-5, 5]: " + std::to_string(value));
  }
  Expression e;
  e.kind_ = NodeKind::Integer;
  e.ivalue_ = value;
  return e;
}

Expression Expression::constant(double value) {
  Expression e;
  e.kind_ = NodeKind::Constant;
  e.value_ = value;
  return e;
}

std::size_t Expression::size() const noexcept {
  std::size_t n = 1;
  for (const auto& c : children_) n += c.size();
  return n;
}

bool operator==(const Expression& a, const Expression& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case NodeKind::Binary:
    case NodeKind::Unary:
      return a.op_ == b.op_ && a.children_ == b.children_;
    case NodeKind::Variable:
    case NodeKind::Integer:
      return a.ivalue_ == b.ivalue_;
    case NodeKind::Constant:
      return a.value_ == b.value_;
  }
  return false;
}

bool structurally_equal(const Expression& a, const Expression& b, double rel_tol) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case NodeKind::Binary:
    case NodeKind::Unary: {
      if (a.op() != b.op()) return false;
      for (std::size_t i = 0; i < a.children().size(); ++i) {
        if (!structurally_equal(a.child(i), b.child(i), rel_tol)) return false;
      }
      return true;
    }
    case NodeKind::Variable:
      return a.variable_index() == b.variable_index();
    case NodeKind::Integer:
      return a.integer_value() == b.integer_value();
    case NodeKind::Constant: {
      const double x = a.constant_value();
      const double y = b.constant_value();
      if (x == y) return true;
      return std::abs(x - y) <= rel_tol * std::max(std::abs(x), std::abs(y));
    }
  }
  return false;
}

bool has_variables(const Expression& e) { return max_variable_index(e) >= 0; }

int max_variable_index(const Expression& e) {
  if (e.kind() == NodeKind::Variable) return e.variable_index();
  int best = -1;
  for (const auto& c : e.children()) best = std::max(best, max_variable_index(c));
  return best;
}

std::size_t count_operators(const Expression& e) {
  if (e.is_leaf()) return 0;
  std::size_t n = 1;
  for (const auto& c : e.children()) n += count_operators(c);
  return n;
}

namespace {

void collect_constants(const Expression& e, std::vector<double>& out) {
  if (e.kind() == NodeKind::Constant) out.push_back(e.constant_value());
  for (const auto& c : e.children()) collect_constants(c, out);
}

Expression replace_constants(const Expression& e, std::span<const double> values, std::size_t& next) {
  switch (e.kind()) {
    case NodeKind::Constant:
      if (next >= values.size()) fail(ErrorCode::InvalidArgument, "too few constant values");
      return Expression::constant(values[next++]);
    case NodeKind::Binary: {
      auto lhs = replace_constants(e.child(0), values, next);
      auto rhs = replace_constants(e.child(1), values, next);
      return Expression::binary(e.op(), std::move(lhs), std::move(rhs));
    }
    case NodeKind::Unary:
      return Expression::unary(e.op(), replace_constants(e.child(0), values, next));
    default:
      return e;
  }
}

}  // namespace

std::vector<double> constant_values(const Expression& e) {
  std::vector<double> out;
  collect_constants(e, out);
  return out;
}

Expression with_constant_values(const Expression& e, std::span<const double> values) {
  std::size_t next = 0;
  auto out = replace_constants(e, values, next);
  if (next != values.size()) fail(ErrorCode::InvalidArgument, "too many constant values");
  return out;
}

void validate(const Expression& e, int dims) {
  switch (e.kind()) {
    case NodeKind::Binary:
    case NodeKind::Unary:
      if (static_cast<int>(e.children().size()) != arity(e.op())) {
        fail(ErrorCode::InvalidArgument, "arity mismatch");
      }
      for (const auto& c : e.children()) validate(c, dims);
      return;
    case NodeKind::Variable:
      if (e.variable_index() >= dims) fail(ErrorCode::InvalidArgument, "variable index out of range");
      return;
    case NodeKind::Integer:
      return;
    case NodeKind::Constant: {
      const double v = std::abs(e.constant_value());
      if (!std::isfinite(v) || v < kMinConstantMagnitude || v > kMaxConstantMagnitude) {
        fail(ErrorCode::InvalidArgument, "constant leaf out of range");
      }
      return;
    }
  }
}

}  // namespace symreg
