#include <doctest.h>

#include <cmath>
#include <functional>

#include "symreg/nn/graph.hpp"
#include "symreg/nn/layers.hpp"

using namespace symreg;
using namespace symreg::nn;

namespace {

using Build = std::function<Var(Graph<double>&, std::vector<Var>&)>;

/// Reduces the output to a scalar with fixed random weights, then compares
/// parameter gradients with central differences.
double worst_gradient_error(std::vector<Parameter<double>*> params, const Build& build, std::uint64_t seed = 1) {
  Rng rng(seed);
  Mat<double> probe_l, probe_r;
  auto forward = [&](bool record) {
    Graph<double> g(record);
    std::vector<Var> vars;
    for (auto* p : params) vars.push_back(g.param(*p));
    const Var out = build(g, vars);
    const auto& v = g.value(out);
    if (probe_l.empty()) {
      probe_l = Mat<double>(1, v.rows);
      probe_r = Mat<double>(v.cols, 1);
      for (auto& x : probe_l.data) x = uniform(rng, -1, 1);
      for (auto& x : probe_r.data) x = uniform(rng, -1, 1);
    }
    const Var s = g.matmul(g.matmul(g.input(probe_l), out), g.input(probe_r));
    if (record) g.backward(s);
    return g.scalar(s);
  };
  for (auto* p : params) p->grad = Mat<double>(p->value.rows, p->value.cols);
  forward(true);
  double worst = 0;
  const double h = 1e-6;
  for (auto* p : params) {
    for (std::size_t k = 0; k < p->value.size(); ++k) {
      const double saved = p->value.data[k];
      p->value.data[k] = saved + h;
      const double up = forward(false);
      p->value.data[k] = saved - h;
      const double down = forward(false);
      p->value.data[k] = saved;
      const double num = (up - down) / (2 * h);
      const double ana = p->grad.data[k];
      worst = std::max(worst, std::abs(num - ana) / std::max({std::abs(num), std::abs(ana), 1e-6}));
    }
  }
  return worst;
}

Parameter<double>& make(ParamStore<double>& store, const char* name, int r, int c, Rng& rng) {
  auto& p = store.add(name, r, c, Init::Normal, rng);
  return p;
}

}  // namespace

TEST_SUITE("graph") {
  TEST_CASE("primitive gradients") {
    Rng rng(7);
    ParamStore<double> store;
    auto& a = make(store, "a", 4, 5, rng);
    auto& b = make(store, "b", 5, 3, rng);
    auto& c = make(store, "c", 4, 5, rng);
    auto& w = make(store, "w", 5, 6, rng);
    auto& bias = make(store, "bias", 1, 6, rng);
    auto& gamma = make(store, "gamma", 1, 5, rng);
    auto& beta = make(store, "beta", 1, 5, rng);

    CHECK(worst_gradient_error({&a, &b}, [](auto& g, auto& v) { return g.matmul(v[0], v[1]); }) < 1e-6);
    CHECK(worst_gradient_error({&a, &c}, [](auto& g, auto& v) { return g.matmul_nt(v[0], v[1]); }) < 1e-6);
    CHECK(worst_gradient_error({&a, &w, &bias}, [](auto& g, auto& v) { return g.linear(v[0], v[1], v[2]); }) < 1e-6);
    CHECK(worst_gradient_error({&a, &c}, [](auto& g, auto& v) { return g.add(v[0], g.scale(v[1], 0.7)); }) < 1e-6);
    CHECK(worst_gradient_error({&a}, [](auto& g, auto& v) { return g.gelu(v[0]); }) < 1e-6);
    CHECK(worst_gradient_error({&a}, [](auto& g, auto& v) { return g.softmax_rows(v[0], false); }) < 1e-6);
    CHECK(worst_gradient_error({&a}, [](auto& g, auto& v) { return g.softmax_rows(v[0], true); }) < 1e-6);
    CHECK(worst_gradient_error({&a, &gamma, &beta},
                               [](auto& g, auto& v) { return g.layer_norm(v[0], v[1], v[2]); }) < 1e-6);
    CHECK(worst_gradient_error({&a, &c}, [](auto& g, auto& v) {
            const Var parts[] = {v[0], g.slice_cols(v[1], 1, 4)};
            return g.concat_cols(parts);
          }) < 1e-6);
    CHECK(worst_gradient_error({&a}, [](auto& g, auto& v) {
            const int ids[] = {3, 0, 3, 1};
            return g.gather_rows(v[0], ids);
          }) < 1e-6);
    CHECK(worst_gradient_error({&a}, [](auto& g, auto& v) {
            const int targets[] = {1, -1, 4, 0};
            return g.cross_entropy_sum(v[0], targets);
          }) < 1e-6);
    CHECK(worst_gradient_error({&a}, [](auto& g, auto& v) {
            const double targets[] = {0.5, -1.0, 2.0, 0.0};
            const std::uint8_t mask[] = {1, 0, 1, 1};
            return g.masked_squared_error_sum(g.slice_cols(v[0], 2, 3), targets, mask);
          }) < 1e-6);
  }

  TEST_CASE("uniform logits over two classes give ln 2") {
    Graph<double> g(false);
    const Var logits = g.input(Mat<double>(3, 2, 0.25));
    const int targets[] = {0, 1, 1};
    CHECK(g.scalar(g.cross_entropy_sum(logits, targets)) == doctest::Approx(3 * std::log(2.0)).epsilon(1e-15));
  }

  TEST_CASE("causal softmax zeroes the future") {
    Graph<double> g(false);
    Mat<double> m(3, 3, 1.0);
    const auto& s = g.value(g.softmax_rows(g.input(m), true));
    CHECK(s(0, 0) == 1.0);
    CHECK(s(0, 1) == 0.0);
    CHECK(s(1, 1) == doctest::Approx(0.5));
    CHECK(s(1, 2) == 0.0);
    CHECK(s(2, 2) == doctest::Approx(1.0 / 3));
  }

  TEST_CASE("dropout") {
    Rng rng(3);
    Graph<double> g(false);
    g.set_dropout_rng(&rng);
    const auto& v = g.value(g.dropout(g.input(Mat<double>(50, 40, 1.0)), 0.25));
    int zeros = 0;
    for (double x : v.data) {
      if (x == 0.0) {
        ++zeros;
      } else {
        CHECK(x == doctest::Approx(1.0 / 0.75));
      }
    }
    CHECK(zeros > 400);
    CHECK(zeros < 600);
    Graph<double> eval(false);
    const auto& same = eval.value(eval.dropout(eval.input(Mat<double>(2, 2, 1.0)), 0.25));
    for (double x : same.data) CHECK(x == 1.0);
  }

  TEST_CASE("gradients accumulate across graphs") {
    Rng rng(1);
    ParamStore<double> store;
    auto& p = make(store, "p", 1, 1, rng);
    store.zero_grad();
    for (int i = 0; i < 2; ++i) {
      Graph<double> g(true);
      const Var v = g.param(p);
      const double w[] = {3.0};
      g.backward(g.weighted_sum(std::span<const Var>(&v, 1), w));
    }
    CHECK(p.grad.data[0] == 6.0);
  }
}
