#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "symreg/benchmark_registry.hpp"
#include "symreg/const_opt.hpp"
#include "symreg/datagen.hpp"
#include "symreg/encoding.hpp"
#include "symreg/normalize.hpp"
#include "test_util.hpp"

using namespace symreg;

namespace {

PointSet make_points(const Expression& truth, int n, double lo, double hi, std::uint64_t seed) {
  Rng rng(seed);
  PointSet ps;
  ps.inputs.resize(n, 1);
  for (int i = 0; i < n; ++i) ps.inputs(i, 0) = uniform(rng, lo, hi);
  ps.outputs = evaluate(truth, ps.inputs);
  ps.intervals = {Interval::Full};
  return ps;
}

}  // namespace

TEST_SUITE("const_opt") {
  TEST_CASE("mse examples") {
    const auto truth = parse_infix("x^2 + 1.5");
    const auto ps = make_points(truth, 30, -2, 2, 1);
    CHECK(mse(truth, ps) == 0.0);
    PointSet two;
    two.inputs.resize(2, 1);
    two.inputs << 0.3, 0.7;
    two.outputs.resize(2);
    two.outputs << 1.0, -1.0;
    CHECK(mse(Expression::integer(0), two) == 1.0);
    CHECK(mse(parse_infix("ln(-(x^2) - 1)"), two) == std::numeric_limits<double>::infinity());
  }

  TEST_CASE("half-finite rule") {
    PointSet ps;
    ps.inputs.resize(4, 1);
    ps.inputs << -1.0, -2.0, 1.0, 4.0;
    ps.outputs = Eigen::VectorXd::Zero(4);
    // Two of four finite is enough; the mean runs over the finite ones only.
    CHECK(mse(parse_infix("sqrt(x)"), ps) == doctest::Approx((1.0 + 4.0) / 2.0));
    ps.inputs << -1.0, -2.0, -3.0, 4.0;
    CHECK(std::isinf(mse(parse_infix("sqrt(x)"), ps)));
  }

  TEST_CASE("gradient examples") {
    PointSet one;
    one.inputs.resize(1, 1);
    one.inputs << 1.0;
    one.outputs.resize(1);
    one.outputs << 2.0;
    const auto e = Expression::binary(Op::Mul, Expression::constant(1.0), Expression::variable(0));
    const auto g = grad_constants(e, one);
    REQUIRE(g.size() == 1);
    CHECK(g[0] == doctest::Approx(-2.0));
    CHECK(grad_constants(parse_infix("x^2 + sin(x)"), one).empty());
  }

  TEST_CASE("gradients agree with central differences") {
    auto config = GeneratorConfig::defaults(1);
    const Generator gen(config);
    Rng rng(21);
    int compared = 0;
    for (std::uint64_t t = 0; t < 150; ++t) {
      const auto rec = gen.generate(t, derive_seed(21, t));
      const Expression truth = decode_preorder(rec.tokens, gen.vocabulary(), config.encoding);
      std::vector<double> c = constant_values(truth);
      if (c.empty()) continue;
      for (auto& v : c) v *= uniform(rng, 0.5, 2.0);
      const Expression e = with_constant_values(truth, c);
      const auto& ps = rec.points;
      const CompiledExpression compiled(e);
      const auto lg = loss_and_gradient(compiled, ps.inputs, ps.outputs, compiled.initial_constants());
      if (!std::isfinite(lg.loss)) continue;
      const auto fd = oracle::fd_gradient(e, ps.inputs, ps.outputs);
      const auto fd_half = oracle::fd_gradient(e, ps.inputs, ps.outputs, 5e-7);
      double scale = 0;
      for (auto v : fd) scale = std::max(scale, static_cast<double>(std::abs(v)));
      for (std::size_t k = 0; k < fd.size(); ++k) {
        const double want = static_cast<double>(fd[k]);
        const double denom = std::max({std::abs(want), 1e-6 * scale, 1e-8});
        // Near a pole the difference quotient itself has not converged.
        if (std::abs(static_cast<double>(fd_half[k]) - want) / denom > 1e-6) continue;
        CHECK_MESSAGE(std::abs(lg.gradient[k] - want) / denom < 1e-5, to_infix(e));
      }
      ++compared;
    }
    CHECK(compared > 40);
  }

  TEST_CASE("refine recovers a linear fit") {
    const auto ps = make_points(parse_infix("2*x + 3"), 50, -5, 5, 3);
    const auto skeleton = parse_infix("1.0*x + 1.0");
    RefineOptions opts;
    opts.max_iterations = 5000;
    opts.patience = 200;
    opts.min_relative_improvement = 1e-12;
    const auto r = refine(skeleton, ps, opts);
    const auto c = constant_values(r.expr);
    REQUIRE(c.size() == 2);
    // Independent closed form.
    std::vector<long double> xs, ones, ys;
    for (Eigen::Index i = 0; i < ps.outputs.size(); ++i) {
      xs.push_back(ps.inputs(i, 0));
      ones.push_back(1.0L);
      ys.push_back(ps.outputs[i]);
    }
    const auto ls = oracle::least_squares({xs, ones}, ys);
    CHECK(std::abs(c[0] - static_cast<double>(ls[0])) <= 1e-4);
    CHECK(std::abs(c[1] - static_cast<double>(ls[1])) <= 1e-4);
    CHECK(std::abs(c[0] - 2.0) <= 1e-4);
    CHECK(std::abs(c[1] - 3.0) <= 1e-4);
    CHECK(r.mse <= r.initial_mse);
  }

  TEST_CASE("refine recovers the cubic constant benchmark") {
    const auto& f = find_benchmark("Constant-1");
    Rng rng(4);
    SamplingPolicy policy;
    auto sampled = sample_points(f.expr, policy, rng);
    REQUIRE(std::holds_alternative<PointSet>(sampled));
    const auto& ps = std::get<PointSet>(sampled);
    std::vector<long double> x3, x2, x1, ys;
    for (Eigen::Index i = 0; i < ps.outputs.size(); ++i) {
      const long double x = ps.inputs(i, 0);
      x3.push_back(x * x * x);
      x2.push_back(x * x);
      x1.push_back(x);
      ys.push_back(ps.outputs[i]);
    }
    const auto ls = oracle::least_squares({x3, x2, x1}, ys);
    CHECK(std::abs(static_cast<double>(ls[0]) - 3.39) < 1e-9);
    CHECK(std::abs(static_cast<double>(ls[1]) - 2.12) < 1e-9);
    CHECK(std::abs(static_cast<double>(ls[2]) - 1.78) < 1e-9);
    const auto skeleton = parse_infix("1.0*x^3 + 1.0*x^2 + 1.0*x");
    RefineOptions opts;
    opts.learning_rate = 0.01;
    opts.max_iterations = 50000;
    opts.patience = 2000;
    opts.min_relative_improvement = 1e-12;
    const auto r = refine(skeleton, ps, opts);
    const auto c = constant_values(r.expr);
    REQUIRE(c.size() == 3);
    CHECK(std::abs(c[0] - 3.39) <= 1e-3);
    CHECK(std::abs(c[1] - 2.12) <= 1e-3);
    CHECK(std::abs(c[2] - 1.78) <= 1e-3);
  }

  TEST_CASE("constant-free expressions are returned unchanged") {
    const auto ps = make_points(parse_infix("x^2"), 20, -1, 1, 5);
    const auto e = parse_infix("x^3 + x");
    const auto r = refine(e, ps);
    CHECK(r.expr == e);
    CHECK(r.mse == mse(e, ps));
    CHECK(r.iterations == 0);
  }

  TEST_CASE("refine never returns a worse iterate") {
    const auto ps = make_points(parse_infix("exp(0.3*x) + 2.5"), 40, -3, 3, 6);
    for (double lr : {0.001, 0.05, 5.0}) {
      RefineOptions opts;
      opts.learning_rate = lr;
      for (auto optimizer : {Optimizer::Adam, Optimizer::GradientDescent}) {
        opts.optimizer = optimizer;
        const auto r = refine(parse_infix("exp(1.0*x) + 1.0"), ps, opts);
        CHECK(r.mse <= r.initial_mse);
        CHECK(r.mse == doctest::Approx(mse(r.expr, ps)));
      }
    }
  }

  TEST_CASE("options validation and names") {
    RefineOptions bad;
    bad.learning_rate = -1;
    CHECK_THROWS_CODE(bad.validate(), ErrorCode::InvalidArgument);
    CHECK(optimizer_from_name("adam") == Optimizer::Adam);
    CHECK(optimizer_from_name("gd") == Optimizer::GradientDescent);
    CHECK(optimizer_name(Optimizer::Adam) == "adam");
  }
}
