#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "symreg/eval.hpp"
#include "symreg/normalize.hpp"
#include "test_util.hpp"

using namespace symreg;

namespace {

Expression X() { return Expression::variable(0); }
Expression I(int v) { return Expression::integer(v); }

bool agree_on_random_points(const Expression& a, const Expression& b) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int i = 0; i < 50; ++i) {
    const long double x[] = {u(gen), u(gen)};
    const long double va = oracle::eval(a, x), vb = oracle::eval(b, x);
    if (std::abs(va - vb) > 1e-12L * std::max(1.0L, std::abs(va))) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("normalize") {
  TEST_CASE("rewrite rules") {
    CHECK(rewrite_to_vocabulary(Expression::binary(Op::Div, X(), I(2))) ==
          Expression::binary(Op::Mul, X(), Expression::binary(Op::Pow, I(2), I(-1))));
    CHECK(rewrite_to_vocabulary(Expression::binary(Op::Sub, X(), I(1))) ==
          Expression::binary(Op::Add, X(), Expression::unary(Op::Neg, I(1))));
    CHECK(rewrite_to_vocabulary(Expression::unary(Op::Inv, X())) == Expression::binary(Op::Pow, X(), I(-1)));
    CHECK(rewrite_to_vocabulary(Expression::unary(Op::Pow5, X())) == Expression::binary(Op::Pow, X(), I(5)));
    CHECK(rewrite_to_vocabulary(Expression::unary(Op::Pow6, X())) ==
          Expression::binary(Op::Pow, X(), Expression::constant(6.0)));
  }

  TEST_CASE("pow4(x) - 1 composes both rules") {
    const auto e = Expression::binary(Op::Sub, Expression::unary(Op::Pow4, X()), I(1));
    const auto r = rewrite_to_vocabulary(e);
    CHECK(r == Expression::binary(Op::Add, Expression::binary(Op::Pow, X(), I(4)), Expression::unary(Op::Neg, I(1))));
    CHECK(agree_on_random_points(e, r));
    // Folding turns neg(1) into the integer leaf -1.
    CHECK(normalize(e) == Expression::binary(Op::Add, Expression::binary(Op::Pow, X(), I(4)), I(-1)));
  }

  TEST_CASE("folding") {
    CHECK(normalize(Expression::binary(Op::Add, I(2), I(3))) == I(5));
    CHECK(normalize(Expression::binary(Op::Mul, I(4), I(3))) == Expression::constant(12.0));
    CHECK(normalize(parse_infix("x + 0")) == X());
    CHECK(normalize(parse_infix("1 * x")) == X());
    CHECK(normalize(parse_infix("x ^ 1")) == X());
    CHECK(normalize(Expression::unary(Op::Neg, Expression::unary(Op::Neg, X()))) == X());
    CHECK(normalize(parse_infix("sin(2 + 1) * x")).children()[0].kind() == NodeKind::Constant);
  }

  TEST_CASE("fold errors") {
    CHECK_THROWS_CODE(normalize(parse_infix("ln(0) + x")), ErrorCode::FoldError);
    CHECK_THROWS_CODE(normalize(parse_infix("x * 0.5^100")), ErrorCode::FoldError);
    CHECK_THROWS_CODE(normalize(Expression::binary(Op::Div, X(), I(0))), ErrorCode::FoldError);
  }

  TEST_CASE("normalized output only uses vocabulary operators") {
    const auto e = normalize(parse_infix("x / (y - 3) + 1 / x"));
    std::vector<const Expression*> stack{&e};
    while (!stack.empty()) {
      const Expression* n = stack.back();
      stack.pop_back();
      if (!n->is_leaf()) CHECK(in_vocabulary(n->op()));
      for (const auto& c : n->children()) stack.push_back(&c);
    }
    CHECK(agree_on_random_points(e, parse_infix("x / (y - 3) + 1 / x")));
  }

  TEST_CASE("complexity") {
    auto c = complexity(I(5));
    CHECK(c.token_count == 1);
    CHECK(c.is_constant);
    CHECK(c.is_linear);
    c = complexity(normalize(parse_infix("2*x + 3")));
    CHECK(c.token_count == 5);
    CHECK_FALSE(c.is_constant);
    CHECK(c.is_linear);
    c = complexity(parse_infix("sin(x)"));
    CHECK(c.token_count == 2);
    CHECK_FALSE(c.is_linear);
    CHECK_FALSE(complexity(parse_infix("x*y")).is_linear);
    CHECK(complexity(normalize(parse_infix("x + y - 2*x"))).is_linear);
    CHECK_FALSE(complexity(parse_infix("x^2")).is_linear);
  }
}
