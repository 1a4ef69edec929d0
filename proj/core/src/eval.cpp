#include "symreg/eval.hpp"

#include <cmath>
#include <numbers>

#include "symreg/errors.hpp"

namespace symreg {

double apply_unary(Op op, double a) {
  switch (op) {
    case Op::Sqrt: return std::sqrt(a);
    case Op::Pow2: return a * a;
    case Op::Pow3: return a * a * a;
    case Op::Pow4: return std::pow(a, 4.0);
    case Op::Pow5: return std::pow(a, 5.0);
    case Op::Pow6: return std::pow(a, 6.0);
    case Op::Ln: return std::log(a);
    case Op::Exp: return std::exp(a);
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Tan: return std::tan(a);
    case Op::Cot: return 1.0 / std::tan(a);
    case Op::Asin: return std::asin(a);
    case Op::Acos: return std::acos(a);
    case Op::Atan: return std::atan(a);
    case Op::Acot: return std::numbers::pi / 2.0 - std::atan(a);
    case Op::Neg: return -a;
    case Op::Inv: return std::pow(a, -1.0);
    default: break;
  }
  fail(ErrorCode::InvalidArgument, "not a unary operator: " + std::string(op_name(op)));
}

double apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return a * std::pow(b, -1.0);
    case Op::Pow: return std::pow(a, b);
    default: break;
  }
  fail(ErrorCode::InvalidArgument, "not a binary operator: " + std::string(op_name(op)));
}

double evaluate_at(const Expression& expr, std::span<const double> point) {
  switch (expr.kind()) {
    case NodeKind::Variable: {
      const auto i = static_cast<std::size_t>(expr.variable_index());
      if (i >= point.size()) fail(ErrorCode::InvalidArgument, "point has too few dimensions");
      return point[i];
    }
    case NodeKind::Integer: return expr.integer_value();
    case NodeKind::Constant: return expr.constant_value();
    case NodeKind::Unary: return apply_unary(expr.op(), evaluate_at(expr.child(0), point));
    case NodeKind::Binary:
      return apply_binary(expr.op(), evaluate_at(expr.child(0), point), evaluate_at(expr.child(1), point));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

Eigen::VectorXd evaluate(const Expression& expr, const Eigen::MatrixXd& inputs) {
  CompiledExpression compiled(expr);
  return compiled.evaluate(inputs, compiled.initial_constants());
}

namespace {

int flatten(const Expression& e, std::vector<CompiledExpression::Node>& nodes, std::vector<double>& constants,
            int& dims) {
  const int index = static_cast<int>(nodes.size());
  nodes.emplace_back();
  CompiledExpression::Node node;
  node.kind = e.kind();
  switch (e.kind()) {
    case NodeKind::Variable:
      node.variable = e.variable_index();
      dims = std::max(dims, node.variable + 1);
      break;
    case NodeKind::Integer:
      node.value = e.integer_value();
      break;
    case NodeKind::Constant:
      node.value = e.constant_value();
      node.constant_slot = static_cast<int>(constants.size());
      node.depends_on_constants = true;
      constants.push_back(e.constant_value());
      break;
    case NodeKind::Unary:
      node.op = e.op();
      node.lhs = flatten(e.child(0), nodes, constants, dims);
      node.depends_on_constants = nodes[static_cast<std::size_t>(node.lhs)].depends_on_constants;
      break;
    case NodeKind::Binary:
      node.op = e.op();
      node.lhs = flatten(e.child(0), nodes, constants, dims);
      node.rhs = flatten(e.child(1), nodes, constants, dims);
      node.depends_on_constants = nodes[static_cast<std::size_t>(node.lhs)].depends_on_constants ||
                                  nodes[static_cast<std::size_t>(node.rhs)].depends_on_constants;
      break;
  }
  nodes[static_cast<std::size_t>(index)] = node;
  return index;
}

}  // namespace

CompiledExpression::CompiledExpression(const Expression& expr) {
  nodes_.reserve(expr.size());
  flatten(expr, nodes_, initial_constants_, required_dims_);
}

void CompiledExpression::forward(const Eigen::MatrixXd& inputs, std::span<const double> constants,
                                 std::vector<double>& values) const {
  if (inputs.cols() < required_dims_) fail(ErrorCode::InvalidArgument, "input matrix has too few columns");
  if (constants.size() != initial_constants_.size()) fail(ErrorCode::InvalidArgument, "constant count mismatch");
  const auto n = static_cast<std::size_t>(inputs.rows());
  values.resize(nodes_.size() * n);
  // Children always follow their parent in preorder, so a reverse sweep sees
  // operands before operators.
  for (std::size_t k = nodes_.size(); k-- > 0;) {
    const Node& node = nodes_[k];
    double* out = values.data() + k * n;
    switch (node.kind) {
      case NodeKind::Variable: {
        const double* col = inputs.col(node.variable).data();
        std::copy(col, col + n, out);
        break;
      }
      case NodeKind::Integer:
        std::fill(out, out + n, node.value);
        break;
      case NodeKind::Constant:
        std::fill(out, out + n, constants[static_cast<std::size_t>(node.constant_slot)]);
        break;
      case NodeKind::Unary: {
        const double* a = values.data() + static_cast<std::size_t>(node.lhs) * n;
        for (std::size_t p = 0; p < n; ++p) out[p] = apply_unary(node.op, a[p]);
        break;
      }
      case NodeKind::Binary: {
        const double* a = values.data() + static_cast<std::size_t>(node.lhs) * n;
        const double* b = values.data() + static_cast<std::size_t>(node.rhs) * n;
        switch (node.op) {
          case Op::Add:
            for (std::size_t p = 0; p < n; ++p) out[p] = a[p] + b[p];
            break;
          case Op::Mul:
            for (std::size_t p = 0; p < n; ++p) out[p] = a[p] * b[p];
            break;
          default:
            for (std::size_t p = 0; p < n; ++p) out[p] = apply_binary(node.op, a[p], b[p]);
            break;
        }
        break;
      }
    }
  }
}

Eigen::VectorXd CompiledExpression::evaluate(const Eigen::MatrixXd& inputs, std::span<const double> constants) const {
  std::vector<double> values;
  forward(inputs, constants, values);
  Eigen::VectorXd out(inputs.rows());
  std::copy(values.begin(), values.begin() + inputs.rows(), out.data());
  return out;
}

}  // namespace symreg
