#include <doctest.h>

#include <nlohmann/json.hpp>
#include <numeric>

#include "nn_fixtures.hpp"
#include "symreg/nn/model.hpp"
#include "test_util.hpp"

using namespace symreg;
using namespace symreg::nn;

namespace {

ModelConfig small_config() {
  ModelConfig c = ModelConfig::tiny();
  c.encoder.dim = 16;
  c.encoder.heads = 2;
  c.decoder.dim = 16;
  c.decoder.heads = 2;
  c.decoder.constant_dim = 4;
  c.decoder.layers = 2;
  return c;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("presets") {
    const auto desk = ModelConfig::desk();
    CHECK_NOTHROW(desk.validate());
    const auto full = ModelConfig::full();
    CHECK(full.encoder.dim == 384);
    CHECK(full.encoder.heads == 12);
    CHECK(full.encoder.layers == 4);
    CHECK(full.encoder.inducing_points == 64);
    CHECK(full.encoder.seed_vectors == 32);
    CHECK(full.decoder.dim == 512);
    CHECK(full.decoder.layers == 4);
    CHECK(full.decoder.heads == 8);
    CHECK_NOTHROW(full.validate());
    CHECK_THROWS_CODE(ModelConfig::preset("huge"), ErrorCode::InvalidArgument);
    auto bad = ModelConfig::tiny();
    bad.decoder.heads = 3;
    CHECK_THROWS_CODE(bad.validate(), ErrorCode::InvalidArgument);
    const nlohmann::json j = full;
    CHECK(nlohmann::json(j.get<ModelConfig>()) == j);
  }

  TEST_CASE("point features") {
    Eigen::MatrixXd x(2, 1);
    x << 1.0, -2.0;
    Eigen::VectorXd y(2);
    y << 0.0, 3.0;
    const auto f = point_features<double>(x, y, 2);
    CHECK(f.rows == 2);
    CHECK(f.cols == 3);
    CHECK(f(1, 0) == -2.0);
    CHECK(f(1, 1) == 0.0);
    CHECK(f(1, 2) == doctest::Approx(std::asinh(3.0)));
  }

  TEST_CASE("memory shape and permutation invariance") {
    const auto config = small_config();
    Model<float> model(config, 1);
    const auto ex = fixtures::make_examples(1, 3);
    const auto mem = model.encode_points(ex[0].inputs, ex[0].outputs);
    CHECK(mem.rows == config.encoder.seed_vectors);
    CHECK(mem.cols == config.encoder.dim);
    const auto n = ex[0].outputs.size();
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(5);
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(i)))]);
    Eigen::MatrixXd px(n, ex[0].inputs.cols());
    Eigen::VectorXd py(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      px.row(i) = ex[0].inputs.row(perm[static_cast<std::size_t>(i)]);
      py[i] = ex[0].outputs[perm[static_cast<std::size_t>(i)]];
    }
    const auto pmem = model.encode_points(px, py);
    for (std::size_t i = 0; i < mem.size(); ++i) CHECK(std::abs(mem.data[i] - pmem.data[i]) <= 1e-5);
  }

  TEST_CASE("decoder is causal") {
    Model<float> model(small_config(), 2);
    const auto ex = fixtures::make_examples(1, 4);
    const auto vocab = Vocabulary::standard(EncodingMode::Extended, 2);
    const auto memory = model.encode_points(ex[0].inputs, ex[0].outputs);
    std::vector<int> tokens{vocab.start()};
    std::vector<float> consts{0.0f};
    for (std::size_t i = 0; i < ex[0].symbols.size(); ++i) {
      tokens.push_back(ex[0].symbols[i]);
      consts.push_back(static_cast<float>(ex[0].values[i]));
    }
    Graph<float> full(false);
    const auto out = model.decode(full, full.input(memory), tokens, consts);
    const auto& logits = full.value(out.logits);
    for (std::size_t len = 1; len < tokens.size(); ++len) {
      Graph<float> g(false);
      const auto o = model.decode(g, g.input(memory), std::span(tokens).first(len), std::span(consts).first(len));
      const auto& l = g.value(o.logits);
      for (int r = 0; r < l.rows; ++r) {
        for (int c = 0; c < l.cols; ++c) CHECK(l(r, c) == logits(r, c));
      }
      // Changing the suffix does not matter either.
      std::vector<int> other = tokens;
      for (std::size_t k = len; k < other.size(); ++k) other[k] = vocab.id("sin");
      Graph<float> g2(false);
      const auto o2 = model.decode(g2, g2.input(memory), other, consts);
      for (int r = 0; r < static_cast<int>(len); ++r) {
        for (int c = 0; c < logits.cols; ++c) CHECK(g2.value(o2.logits)(r, c) == logits(r, c));
      }
    }
  }

  TEST_CASE("step decoding matches the teacher-forced pass") {
    Model<float> model(small_config(), 3);
    const auto ex = fixtures::make_examples(1, 5);
    const auto vocab = Vocabulary::standard(EncodingMode::Extended, 2);
    const auto memory = model.encode_points(ex[0].inputs, ex[0].outputs);
    std::vector<int> tokens{vocab.start()};
    std::vector<float> consts{0.0f};
    for (std::size_t i = 0; i < ex[0].symbols.size(); ++i) {
      tokens.push_back(ex[0].symbols[i]);
      consts.push_back(static_cast<float>(ex[0].values[i]));
    }
    Graph<float> g(false);
    const auto out = model.decode(g, g.input(memory), tokens, consts);
    const auto& logits = g.value(out.logits);
    const auto& values = g.value(out.values);
    for (std::size_t len = 1; len <= tokens.size(); ++len) {
      const auto step = model.decode_step(memory, std::span(tokens).first(len), std::span(consts).first(len));
      const int r = static_cast<int>(len) - 1;
      double mx = -1e30, z = 0, total = 0;
      for (int c = 0; c < logits.cols; ++c) mx = std::max(mx, static_cast<double>(logits(r, c)));
      for (int c = 0; c < logits.cols; ++c) z += std::exp(logits(r, c) - mx);
      for (int c = 0; c < logits.cols; ++c) {
        CHECK(std::abs(step.probabilities[static_cast<std::size_t>(c)] - std::exp(logits(r, c) - mx) / z) <= 1e-5);
        total += step.probabilities[static_cast<std::size_t>(c)];
      }
      CHECK(std::abs(total - 1.0) <= 1e-6);
      CHECK(std::abs(step.value - values(r, 0)) <= 1e-5);
    }
  }

  TEST_CASE("unpadded sample features equal the padded batch rows") {
    auto ex = fixtures::make_examples(3, 6);
    ex[1].inputs.conservativeResize(40, Eigen::NoChange);
    ex[1].outputs.conservativeResize(40);
    const auto vocab = Vocabulary::standard(EncodingMode::Extended, 2);
    const auto batch = fixtures::batch_of(ex, vocab);
    CHECK(batch.point_counts[1] == 40);
    for (int b = 0; b < 3; ++b) {
      const auto f = batch.sample_features<double>(b);
      const auto want = point_features<double>(ex[static_cast<std::size_t>(b)].inputs,
                                               ex[static_cast<std::size_t>(b)].outputs, 2);
      REQUIRE(f.rows == want.rows);
      for (std::size_t i = 0; i < f.size(); ++i) CHECK(f.data[i] == doctest::Approx(want.data[i]).epsilon(1e-6));
    }
    Model<double> model(small_config(), 4);
    const auto m1 = model.encode_points(ex[1].inputs, ex[1].outputs);
    Graph<double> g(false);
    const auto& m2 = g.value(model.encode(g, batch.sample_features<double>(1)));
    for (std::size_t i = 0; i < m1.size(); ++i) CHECK(std::abs(m1.data[i] - m2.data[i]) <= 1e-6);
  }

  TEST_CASE("sequences longer than the limit are refused") {
    auto config = small_config();
    config.decoder.max_length = 4;
    Model<float> model(config, 1);
    const auto ex = fixtures::make_examples(1, 7);
    const auto memory = model.encode_points(ex[0].inputs, ex[0].outputs);
    const std::vector<int> tokens(5, 1);
    const std::vector<float> consts(5, 0.0f);
    Graph<float> g(false);
    CHECK_THROWS_CODE(model.decode(g, g.input(memory), tokens, consts), ErrorCode::SequenceTooLong);
  }

  TEST_CASE("tiny network gradients match finite differences") {
    Model<double> model(ModelConfig::tiny(), 11);
    auto ex = fixtures::make_examples(2, 8);
    fixtures::thin_points(ex, 12);
    const auto vocab = Vocabulary::standard(EncodingMode::Extended, 2);
    const auto r = fixtures::gradient_check(model, fixtures::batch_of(ex, vocab), 1.0, 1e-4);
    INFO("worst " << r.worst << " at " << r.worst_name);
    CHECK(r.checked == model.params().scalar_count());
    CHECK(r.failures == 0);
  }
}
