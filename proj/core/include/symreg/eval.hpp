#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "symreg/expr.hpp"

namespace symreg {

/// Point-wise operator semantics. Domain violations produce NaN or +-inf;
/// nothing here throws.
double apply_unary(Op op, double a);
double apply_binary(Op op, double a, double b);

/// Value at a single point (point[i] is variable i).
double evaluate_at(const Expression& expr, std::span<const double> point);

/// Element-wise evaluation; `inputs` is n_points x n_dims. Non-finite entries
/// in the result mark domain violations.
Eigen::VectorXd evaluate(const Expression& expr, const Eigen::MatrixXd& inputs);

/// Flattened preorder form of an expression for repeated evaluation with
/// varying constants. Constant leaves read from a separate slot array so
/// callers can move constants without rebuilding the tree.
class CompiledExpression {
 public:
  struct Node {
    NodeKind kind = NodeKind::Integer;
    Op op = Op::Add;
    int lhs = -1;
    int rhs = -1;
    int variable = -1;
    int constant_slot = -1;
    double value = 0.0;
    /// True when a constant leaf lives in this subtree.
    bool depends_on_constants = false;
  };

  explicit CompiledExpression(const Expression& expr);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t constant_count() const noexcept { return initial_constants_.size(); }
  const std::vector<double>& initial_constants() const noexcept { return initial_constants_; }
  int required_dims() const noexcept { return required_dims_; }

  /// Fills `values` (node-major, nodes x n_points) for every node; the root
  /// occupies the first n_points entries.
  void forward(const Eigen::MatrixXd& inputs, std::span<const double> constants, std::vector<double>& values) const;

  Eigen::VectorXd evaluate(const Eigen::MatrixXd& inputs, std::span<const double> constants) const;

 private:
  std::vector<Node> nodes_;
  std::vector<double> initial_constants_;
  int required_dims_ = 0;
};

}  // namespace symreg
