#pragma once

// Reference implementations used only by tests. They are written directly
// from the mathematical definitions and share no code with the library.

#include <Eigen/Core>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "symreg/expr.hpp"

namespace oracle {

using symreg::Expression;
using symreg::NodeKind;
using symreg::Op;

template <typename T>
T eval_as(const Expression& e, std::span<const T> x) {
  switch (e.kind()) {
    case NodeKind::Variable: return x[static_cast<std::size_t>(e.variable_index())];
    case NodeKind::Integer: return e.integer_value();
    case NodeKind::Constant: return e.constant_value();
    case NodeKind::Unary: {
      const T a = eval_as<T>(e.child(0), x);
      switch (e.op()) {
        case Op::Sqrt: return std::sqrt(a);
        case Op::Pow2: return a * a;
        case Op::Pow3: return a * a * a;
        case Op::Pow4: return a * a * a * a;
        case Op::Pow5: return a * a * a * a * a;
        case Op::Pow6: return a * a * a * a * a * a;
        case Op::Ln: return std::log(a);
        case Op::Exp: return std::exp(a);
        case Op::Sin: return std::sin(a);
        case Op::Cos: return std::cos(a);
        case Op::Tan: return std::tan(a);
        case Op::Cot: return std::cos(a) / std::sin(a);
        case Op::Asin: return std::asin(a);
        case Op::Acos: return std::acos(a);
        case Op::Atan: return std::atan(a);
        case Op::Acot: return std::numbers::pi_v<T> / 2 - std::atan(a);
        case Op::Neg: return -a;
        case Op::Inv: return T(1) / a;
        default: break;
      }
      break;
    }
    case NodeKind::Binary: {
      const T a = eval_as<T>(e.child(0), x);
      const T b = eval_as<T>(e.child(1), x);
      switch (e.op()) {
        case Op::Add: return a + b;
        case Op::Sub: return a - b;
        case Op::Mul: return a * b;
        case Op::Div: return a / b;
        case Op::Pow: return std::pow(a, b);
        default: break;
      }
      break;
    }
  }
  throw std::logic_error("oracle::eval: unhandled node");
}

inline long double eval(const Expression& e, std::span<const long double> x) { return eval_as<long double>(e, x); }

/// True when double and extended-precision evaluation agree to `tol`, i.e. the
/// point is not so ill-conditioned that double rounding dominates the result.
inline bool well_conditioned(const Expression& e, std::span<const long double> x, long double tol = 1e-9L) {
  std::vector<double> xd(x.begin(), x.end());
  const long double lo = eval_as<double>(e, std::span<const double>(xd));
  const long double hi = eval_as<long double>(e, x);
  if (!std::isfinite(lo) || !std::isfinite(hi)) return std::isfinite(lo) == std::isfinite(hi);
  return std::abs(lo - hi) <= tol * std::max(1.0L, std::abs(hi));
}

inline std::vector<long double> row_of(const Eigen::MatrixXd& inputs, Eigen::Index row) {
  std::vector<long double> x(static_cast<std::size_t>(inputs.cols()));
  for (Eigen::Index d = 0; d < inputs.cols(); ++d) x[static_cast<std::size_t>(d)] = inputs(row, d);
  return x;
}

inline long double eval_row(const Expression& e, const Eigen::MatrixXd& inputs, Eigen::Index row) {
  return eval(e, row_of(inputs, row));
}

/// Central-difference gradient of the masked mse. A point enters the loss when
/// the expression is finite there; it enters the derivative for constant k only
/// when both perturbed evaluations are finite as well.
inline std::vector<long double> fd_gradient(const Expression& e, const Eigen::MatrixXd& inputs,
                                            const Eigen::VectorXd& outputs, double rel_step = 1e-6) {
  const std::vector<double> c0 = symreg::constant_values(e);
  const Eigen::Index n = outputs.size();
  std::vector<long double> base(static_cast<std::size_t>(n));
  long double finite = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    base[static_cast<std::size_t>(i)] = eval_row(e, inputs, i);
    if (std::isfinite(base[static_cast<std::size_t>(i)])) finite += 1;
  }
  std::vector<long double> grad(c0.size(), 0.0L);
  if (finite == 0) return grad;
  for (std::size_t k = 0; k < c0.size(); ++k) {
    const double h = rel_step * std::max(1.0, std::abs(c0[k]));
    std::vector<double> cp = c0, cm = c0;
    cp[k] += h;
    cm[k] -= h;
    const Expression ep = symreg::with_constant_values(e, cp);
    const Expression em = symreg::with_constant_values(e, cm);
    const long double step = static_cast<long double>(cp[k]) - static_cast<long double>(cm[k]);
    long double g = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const long double f = base[static_cast<std::size_t>(i)];
      if (!std::isfinite(f)) continue;
      const long double fp = eval_row(ep, inputs, i);
      const long double fm = eval_row(em, inputs, i);
      if (!std::isfinite(fp) || !std::isfinite(fm)) continue;
      g += 2 * (f - outputs[i]) * (fp - fm) / step;
    }
    grad[k] = g / finite;
  }
  return grad;
}

/// Least squares fit of y on the given basis columns via the normal equations
/// in extended precision, solved by Gaussian elimination with partial pivoting.
inline std::vector<long double> least_squares(const std::vector<std::vector<long double>>& basis,
                                              const std::vector<long double>& y) {
  const std::size_t m = basis.size();
  std::vector<std::vector<long double>> a(m, std::vector<long double>(m + 1, 0.0L));
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      for (std::size_t i = 0; i < y.size(); ++i) a[r][c] += basis[r][i] * basis[c][i];
    }
    for (std::size_t i = 0; i < y.size(); ++i) a[r][m] += basis[r][i] * y[i];
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      const long double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= m; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<long double> coef(m);
  for (std::size_t r = 0; r < m; ++r) coef[r] = a[r][m] / a[r][r];
  return coef;
}

inline long double r_squared(const std::vector<long double>& y, const std::vector<long double>& yhat) {
  long double mean = 0;
  for (auto v : y) mean += v;
  mean /= static_cast<long double>(y.size());
  long double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  return 1 - ss_res / ss_tot;
}

}  // namespace oracle
