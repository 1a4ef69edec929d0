#include "symreg/const_opt.hpp"

#include <cmath>
#include <limits>

#include "symreg/errors.hpp"

namespace symreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void collect_constants(const Expression& e, std::size_t& next, ConstantVector& out) {
  const std::size_t index = next++;
  if (e.kind() == NodeKind::Constant) {
    out.nodes.push_back(index);
    out.values.push_back(e.constant_value());
  }
  for (const auto& c : e.children()) collect_constants(c, next, out);
}

double unary_derivative(Op op, double a, double out) {
  switch (op) {
    case Op::Sqrt: return 0.5 / out;
    case Op::Pow2: return 2.0 * a;
    case Op::Pow3: return 3.0 * a * a;
    case Op::Pow4: return 4.0 * a * a * a;
    case Op::Pow5: return 5.0 * std::pow(a, 4.0);
    case Op::Pow6: return 6.0 * std::pow(a, 5.0);
    case Op::Ln: return 1.0 / a;
    case Op::Exp: return out;
    case Op::Sin: return std::cos(a);
    case Op::Cos: return -std::sin(a);
    case Op::Tan: return 1.0 + out * out;
    case Op::Cot: return -(1.0 + out * out);
    case Op::Asin: return 1.0 / std::sqrt(1.0 - a * a);
    case Op::Acos: return -1.0 / std::sqrt(1.0 - a * a);
    case Op::Atan: return 1.0 / (1.0 + a * a);
    case Op::Acot: return -1.0 / (1.0 + a * a);
    case Op::Neg: return -1.0;
    case Op::Inv: return -out * out;
    default: return kNaN;
  }
}

}  // namespace

ConstantVector ConstantVector::of(const Expression& expr) {
  ConstantVector v;
  std::size_t next = 0;
  collect_constants(expr, next, v);
  return v;
}

double mse(const CompiledExpression& expr, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs,
           std::span<const double> constants) {
  const Eigen::VectorXd f = expr.evaluate(inputs, constants);
  double sum = 0.0;
  std::size_t finite = 0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (!std::isfinite(f[i])) continue;
    const double r = f[i] - outputs[i];
    sum += r * r;
    ++finite;
  }
  if (finite == 0 || 2 * finite < static_cast<std::size_t>(f.size())) return kInf;
  return sum / static_cast<double>(finite);
}

double mse(const Expression& expr, const PointSet& points) {
  const CompiledExpression compiled(expr);
  return mse(compiled, points.inputs, points.outputs, compiled.initial_constants());
}

LossGradient loss_and_gradient(const CompiledExpression& expr, const Eigen::MatrixXd& inputs,
                               const Eigen::VectorXd& outputs, std::span<const double> constants) {
  LossGradient result;
  result.gradient.assign(expr.constant_count(), 0.0);
  const auto n = static_cast<std::size_t>(inputs.rows());
  std::vector<double> values;
  expr.forward(inputs, constants, values);

  double sum = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    if (!std::isfinite(values[p])) continue;
    const double r = values[p] - outputs[static_cast<Eigen::Index>(p)];
    sum += r * r;
    ++result.finite_points;
  }
  const std::size_t finite = result.finite_points;
  result.loss = (finite == 0 || 2 * finite < n) ? kInf : sum / static_cast<double>(finite);
  if (finite == 0 || expr.constant_count() == 0) return result;

  const auto& nodes = expr.nodes();
  std::vector<double> adjoint(nodes.size() * n, 0.0);
  const double scale = 2.0 / static_cast<double>(finite);
  for (std::size_t p = 0; p < n; ++p) {
    if (std::isfinite(values[p])) adjoint[p] = scale * (values[p] - outputs[static_cast<Eigen::Index>(p)]);
  }

  // Preorder puts parents first, so a forward sweep finishes each adjoint
  // before it is pushed to the children.
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& node = nodes[k];
    if (!node.depends_on_constants) continue;
    const double* g = adjoint.data() + k * n;
    const double* out = values.data() + k * n;
    switch (node.kind) {
      case NodeKind::Constant: {
        double acc = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
          if (std::isfinite(g[p])) acc += g[p];
        }
        result.gradient[static_cast<std::size_t>(node.constant_slot)] += acc;
        break;
      }
      case NodeKind::Unary: {
        const auto c = static_cast<std::size_t>(node.lhs);
        const double* a = values.data() + c * n;
        double* ga = adjoint.data() + c * n;
        for (std::size_t p = 0; p < n; ++p) {
          if (g[p] != 0.0 || !std::isfinite(g[p])) ga[p] += g[p] * unary_derivative(node.op, a[p], out[p]);
        }
        break;
      }
      case NodeKind::Binary: {
        const auto l = static_cast<std::size_t>(node.lhs);
        const auto r = static_cast<std::size_t>(node.rhs);
        const bool dl = nodes[l].depends_on_constants;
        const bool dr = nodes[r].depends_on_constants;
        const double* a = values.data() + l * n;
        const double* b = values.data() + r * n;
        double* ga = adjoint.data() + l * n;
        double* gb = adjoint.data() + r * n;
        for (std::size_t p = 0; p < n; ++p) {
          const double gp = g[p];
          if (gp == 0.0) continue;
          switch (node.op) {
            case Op::Add:
              if (dl) ga[p] += gp;
              if (dr) gb[p] += gp;
              break;
            case Op::Sub:
              if (dl) ga[p] += gp;
              if (dr) gb[p] -= gp;
              break;
            case Op::Mul:
              if (dl) ga[p] += gp * b[p];
              if (dr) gb[p] += gp * a[p];
              break;
            case Op::Div: {
              const double inv = std::pow(b[p], -1.0);
              if (dl) ga[p] += gp * inv;
              if (dr) gb[p] -= gp * a[p] * inv * inv;
              break;
            }
            case Op::Pow:
              if (dl) ga[p] += gp * b[p] * std::pow(a[p], b[p] - 1.0);
              if (dr) gb[p] += a[p] > 0.0 ? gp * out[p] * std::log(a[p]) : kNaN;
              break;
            default:
              if (dl) ga[p] = kNaN;
              if (dr) gb[p] = kNaN;
              break;
          }
        }
        break;
      }
      default:
        break;
    }
  }
  return result;
}

std::vector<double> grad_constants(const Expression& expr, const PointSet& points) {
  const CompiledExpression compiled(expr);
  return loss_and_gradient(compiled, points.inputs, points.outputs, compiled.initial_constants()).gradient;
}

std::string_view optimizer_name(Optimizer o) {
  return o == Optimizer::Adam ? "adam" : "gd";
}

Optimizer optimizer_from_name(std::string_view name) {
  if (name == "adam") return Optimizer::Adam;
  if (name == "gd") return Optimizer::GradientDescent;
  fail(ErrorCode::InvalidArgument, "unknown optimizer: " + std::string(name));
}

void RefineOptions::validate() const {
  if (!(learning_rate > 0.0) || max_iterations < 0 || patience <= 0 || !(min_relative_improvement > 0.0) ||
      !(clip_norm > 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    fail(ErrorCode::InvalidArgument, "refine options out of range");
  }
}

RefineResult refine(const Expression& expr, const PointSet& points, const RefineOptions& opts) {
  opts.validate();
  const CompiledExpression compiled(expr);
  std::vector<double> c = compiled.initial_constants();
  RefineResult result{expr, mse(compiled, points.inputs, points.outputs, c), 0.0, 0};
  result.initial_mse = result.mse;
  if (c.empty()) return result;

  std::vector<double> best = c;
  double best_loss = result.mse;
  std::vector<double> m(c.size(), 0.0), v(c.size(), 0.0);
  int stale = 0;
  int it = 0;
  while (it < opts.max_iterations) {
    auto lg = loss_and_gradient(compiled, points.inputs, points.outputs, c);
    if (lg.loss < best_loss) {
      const double improvement = std::isfinite(best_loss) ? (best_loss - lg.loss) / std::max(best_loss, 1e-300) : 1.0;
      stale = improvement < opts.min_relative_improvement ? stale + 1 : 0;
      best_loss = lg.loss;
      best = c;
    } else if (it > 0) {
      ++stale;
    }
    if (best_loss == 0.0 || stale >= opts.patience || lg.finite_points == 0) break;

    double norm2 = 0.0;
    for (double g : lg.gradient) norm2 += g * g;
    if (!std::isfinite(norm2)) break;
    const double norm = std::sqrt(norm2);
    const double clip = norm > opts.clip_norm ? opts.clip_norm / norm : 1.0;

    ++it;
    for (std::size_t k = 0; k < c.size(); ++k) {
      const double g = lg.gradient[k] * clip;
      if (opts.optimizer == Optimizer::GradientDescent) {
        c[k] -= opts.learning_rate * g;
      } else {
        m[k] = opts.beta1 * m[k] + (1.0 - opts.beta1) * g;
        v[k] = opts.beta2 * v[k] + (1.0 - opts.beta2) * g * g;
        const double mh = m[k] / (1.0 - std::pow(opts.beta1, it));
        const double vh = v[k] / (1.0 - std::pow(opts.beta2, it));
        c[k] -= opts.learning_rate * mh / (std::sqrt(vh) + opts.epsilon);
      }
    }
  }
  // The last step is evaluated but not counted; score it too.
  if (it == opts.max_iterations && it > 0) {
    const double last = mse(compiled, points.inputs, points.outputs, c);
    if (last < best_loss) {
      best_loss = last;
      best = c;
    }
  }
  result.expr = with_constant_values(expr, best);
  result.mse = best_loss;
  result.iterations = it;
  return result;
}

}  // namespace symreg
