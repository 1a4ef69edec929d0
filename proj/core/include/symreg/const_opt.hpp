#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "symreg/eval.hpp"
#include "symreg/expr.hpp"
#include "symreg/sampling.hpp"

namespace symreg {

/// Constant leaves of one expression in preorder, with their current values.
struct ConstantVector {
  /// Preorder node index of each constant leaf.
  std::vector<std::size_t> nodes;
  std::vector<double> values;

  static ConstantVector of(const Expression& expr);
  std::size_t size() const noexcept { return values.size(); }
};

/// Mean of (f - y)^2 over points where f is finite; +inf when fewer than half
/// of the points are finite.
double mse(const Expression& expr, const PointSet& points);
double mse(const CompiledExpression& expr, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs,
           std::span<const double> constants);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;
  std::size_t finite_points = 0;
};

/// Reverse-mode derivative of the masked mse with respect to every constant.
/// Points whose value is non-finite drop out of the loss and the gradient; a
/// point whose local derivative chain towards one constant is non-finite (for
/// example pow(a, b) with a <= 0 differentiated in b) is dropped for that
/// constant only. The loss is +inf under the half-finite rule, the gradient is
/// still computed over the finite points.
LossGradient loss_and_gradient(const CompiledExpression& expr, const Eigen::MatrixXd& inputs,
                               const Eigen::VectorXd& outputs, std::span<const double> constants);

std::vector<double> grad_constants(const Expression& expr, const PointSet& points);

enum class Optimizer { GradientDescent, Adam };

std::string_view optimizer_name(Optimizer o);
Optimizer optimizer_from_name(std::string_view name);

struct RefineOptions {
  Optimizer optimizer = Optimizer::Adam;
  double learning_rate = 0.05;
  int max_iterations = 500;
  int patience = 20;
  /// Relative improvement of the best mse below which a step counts as stale.
  double min_relative_improvement = 1e-6;
  /// Global gradient norm cap.
  double clip_norm = 10.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct RefineResult {
  Expression expr;
  double mse = 0.0;
  double initial_mse = 0.0;
  int iterations = 0;
};

/// Gradient search over the constants with the structure fixed. Returns the
/// best iterate seen, so the result never has a higher mse than the input.
RefineResult refine(const Expression& expr, const PointSet& points, const RefineOptions& opts = {});

}  // namespace symreg
