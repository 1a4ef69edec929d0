#pragma once

#include <cstddef>

#include "symreg/expr.hpp"

namespace symreg {

/// Rewrites generator-only operators into vocabulary operators:
/// a-b -> a + neg(b), a/b -> a * pow(b, -1), inv(a) -> pow(a, -1),
/// pow4/5/6(a) -> pow(a, 4/5/6). No folding.
Expression rewrite_to_vocabulary(const Expression& expr);

/// Collapses variable-free subtrees into a single leaf (an integer leaf when
/// the value is an integer in [-5, 5], a constant leaf otherwise) and removes
/// x+0, x*1, neg(neg(x)) and pow(x, 1). Throws FoldError when a folded value is
/// non-finite or its magnitude leaves [1e-10, 1e10].
Expression fold_constants(const Expression& expr);

/// rewrite_to_vocabulary followed by fold_constants.
Expression normalize(const Expression& expr);

struct Complexity {
  std::size_t token_count = 0;
  bool is_constant = false;
  /// Polynomial of total degree <= 1, decided structurally.
  bool is_linear = false;
};

Complexity complexity(const Expression& expr);

}  // namespace symreg
