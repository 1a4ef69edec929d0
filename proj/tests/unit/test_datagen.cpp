#include <doctest.h>

#include <nlohmann/json.hpp>

#include "symreg/corpus.hpp"
#include "symreg/datagen.hpp"
#include "symreg/eval.hpp"
#include "symreg/normalize.hpp"

using namespace symreg;

namespace {

double weight_of(const std::vector<WeightedOp>& ops, Op op) {
  double total = 0, w = 0;
  for (const auto& o : ops) {
    total += o.weight;
    if (o.op == op) w = o.weight;
  }
  return w / total;
}

struct CollectSink final : RecordSink {
  Vocabulary vocab = Vocabulary::standard(EncodingMode::Extended, 2);
  std::vector<std::string> lines;
  void write(const SampleRecord& r) override { lines.push_back(record_to_json(r, vocab).dump()); }
};

}  // namespace

TEST_SUITE("datagen") {
  TEST_CASE("default tables") {
    const auto c = GeneratorConfig::defaults(1);
    CHECK(c.binary_ops.size() == 5);
    CHECK(c.unary_ops.size() == 17);
    CHECK(weight_of(c.binary_ops, Op::Add) == doctest::Approx(8.0 / 28.0));
    CHECK(weight_of(c.unary_ops, Op::Sqrt) == doctest::Approx(8.0 / 63.0));
    CHECK(c.leaves.variable == 20.0);
    CHECK(c.leaves.integer == 10.0);
    CHECK(c.leaves.real == 10.0);
    CHECK(c.leaves.zero == 1.0);
    CHECK(c.max_operators == 10);
    CHECK_NOTHROW(c.validate());
  }

  TEST_CASE("forced binary plus with a fixed seed draws x + 2") {
    auto c = GeneratorConfig::defaults(1);
    c.unary_ops.clear();
    c.binary_ops = {{Op::Add, 1.0}};
    Rng rng(16);
    CHECK(sample_tree(c, 1, rng) ==
          Expression::binary(Op::Add, Expression::variable(0), Expression::integer(2)));
  }

  TEST_CASE("trees have exactly n_ops internal nodes") {
    const auto c = GeneratorConfig::defaults(2);
    Rng rng(3);
    for (int n = 1; n <= 10; ++n) {
      for (int t = 0; t < 50; ++t) {
        const auto e = sample_tree(c, n, rng);
        CHECK(count_operators(e) == static_cast<std::size_t>(n));
        CHECK_NOTHROW(validate(e, 2));
      }
    }
  }

  TEST_CASE("operator frequencies follow the tables") {
    const auto c = GeneratorConfig::defaults(1);
    TreeSampler sampler(c);
    DrawStats stats;
    Rng rng(99);
    while (stats.binary_nodes + stats.unary_nodes < 40000) sampler.sample(1 + uniform_int(rng, 0, 9), rng, &stats);
    auto freq = [&](Op op, std::uint64_t total) {
      const auto idx = static_cast<std::size_t>(std::find(std::begin(kAllOps), std::end(kAllOps), op) - std::begin(kAllOps));
      return static_cast<double>(stats.op_counts[idx]) / static_cast<double>(total);
    };
    for (const auto& w : c.binary_ops) {
      CHECK(std::abs(freq(w.op, stats.binary_nodes) - weight_of(c.binary_ops, w.op)) < 0.015);
    }
    for (const auto& w : c.unary_ops) {
      CHECK(std::abs(freq(w.op, stats.unary_nodes) - weight_of(c.unary_ops, w.op)) < 0.015);
    }
    std::uint64_t leaves = 0;
    for (auto n : stats.leaf_counts) leaves += n;
    const double expect[] = {20.0 / 41, 10.0 / 41, 10.0 / 41, 1.0 / 41};
    for (std::size_t i = 0; i < kLeafClassCount; ++i) {
      CHECK(std::abs(static_cast<double>(stats.leaf_counts[i]) / static_cast<double>(leaves) - expect[i]) < 0.015);
    }
    const double unary_share =
        static_cast<double>(stats.unary_nodes) / static_cast<double>(stats.unary_nodes + stats.binary_nodes);
    CHECK(unary_share > 0.2);
    CHECK(unary_share < 0.8);
  }

  TEST_CASE("attempts reject folded constants") {
    Generator g(GeneratorConfig::defaults(1));
    bool seen = false;
    for (std::uint64_t s = 0; s < 400 && !seen; ++s) {
      Rng rng(s);
      auto a = g.attempt(rng);
      if (auto* r = std::get_if<Rejected>(&a)) seen = r->reason == RejectReason::IsConstant;
    }
    CHECK(seen);
  }

  TEST_CASE("ln records fall back to the positive interval") {
    Generator g(GeneratorConfig::defaults(1));
    bool found = false;
    for (std::uint64_t s = 0; s < 2000 && !found; ++s) {
      const auto rec = g.generate(s, derive_seed(5, s));
      const auto e = decode_preorder(rec.tokens, g.vocabulary(), EncodingMode::Extended);
      if (to_infix(e).find("ln(x)") != std::string::npos && rec.points.intervals[0] == Interval::Positive) {
        found = true;
        const auto again = evaluate(e, rec.points.inputs);
        for (Eigen::Index i = 0; i < again.size(); ++i) CHECK(std::isfinite(again[i]));
      }
    }
    CHECK(found);
  }

  TEST_CASE("records satisfy every filter") {
    Generator g(GeneratorConfig::defaults(2));
    for (std::uint64_t i = 0; i < 300; ++i) {
      const auto rec = g.generate(i, derive_seed(8, i));
      const auto e = decode_preorder(rec.tokens, g.vocabulary(), EncodingMode::Extended);
      CHECK(rec.tokens.size() <= kMaxTokens);
      CHECK(accept(e, rec.points).accepted);
      CHECK(normalize(e) == e);
      CHECK(rec.meta.n_ops >= 1);
      CHECK(rec.meta.n_ops <= 10);
      CHECK(rec.meta.index == i);
    }
  }

  TEST_CASE("corpus output does not depend on worker count") {
    auto c = GeneratorConfig::defaults(1);
    CollectSink one, four;
    const auto s1 = generate_corpus(c, 120, 1, 77, one);
    const auto s4 = generate_corpus(c, 120, 4, 77, four);
    CHECK(one.lines.size() == 120);
    CHECK(one.lines == four.lines);
    CHECK(nlohmann::json(s1) == nlohmann::json(s4));
    CHECK(s1.records == 120);
    CHECK(s1.attempts >= 120);
    CollectSink other;
    generate_corpus(c, 120, 1, 78, other);
    CHECK(other.lines != one.lines);
  }

  TEST_CASE("config json round trip") {
    auto c = GeneratorConfig::defaults(2);
    c.max_operators = 4;
    c.encoding = EncodingMode::Base;
    const nlohmann::json j = c;
    const GeneratorConfig back = j.get<GeneratorConfig>();
    CHECK(nlohmann::json(back) == j);
  }
}
