#include <benchmark/benchmark.h>

#include "symreg/datagen.hpp"
#include "symreg/nn/batch.hpp"
#include "symreg/nn/model.hpp"
#include "symreg/nn/train.hpp"

using namespace symreg;

namespace {

nn::TrainingExample example(std::uint64_t i) {
  const Generator gen(GeneratorConfig::defaults(1));
  return nn::to_training_example(gen.generate(i, derive_seed(6, i)), gen.vocabulary());
}

void BM_EncodePoints(benchmark::State& state) {
  const nn::Model<float> model(nn::ModelConfig::desk(), 1);
  const auto ex = example(0);
  for (auto _ : state) benchmark::DoNotOptimize(model.encode_points(ex.inputs, ex.outputs));
}
BENCHMARK(BM_EncodePoints)->Unit(benchmark::kMillisecond);

void BM_DecodeStep(benchmark::State& state) {
  const nn::Model<float> model(nn::ModelConfig::desk(), 1);
  const auto vocab = Vocabulary::standard(EncodingMode::Extended, 2);
  const auto ex = example(1);
  const auto memory = model.encode_points(ex.inputs, ex.outputs);
  const auto length = static_cast<std::size_t>(state.range(0));
  std::vector<int> tokens{vocab.start()};
  std::vector<float> consts{0.0f};
  while (tokens.size() < length) {
    tokens.push_back(vocab.id("sin"));
    consts.push_back(0.0f);
  }
  for (auto _ : state) benchmark::DoNotOptimize(model.decode_step(memory, tokens, consts));
}
BENCHMARK(BM_DecodeStep)->Arg(1)->Arg(8)->Arg(24)->Unit(benchmark::kMicrosecond);

void BM_TrainBatch(benchmark::State& state) {
  nn::Model<float> model(nn::ModelConfig::desk(), 1);
  const auto vocab = Vocabulary::standard(EncodingMode::Extended, 2);
  std::vector<nn::TrainingExample> examples;
  for (std::uint64_t i = 0; i < 32; ++i) examples.push_back(example(100 + i));
  std::vector<const nn::TrainingExample*> ptrs;
  for (const auto& e : examples) ptrs.push_back(&e);
  const auto batch = nn::make_batch(ptrs, vocab, 2);
  for (auto _ : state) {
    model.params().zero_grad();
    benchmark::DoNotOptimize(nn::batch_loss(model, batch, 1.0, 0.0, nullptr, true));
  }
}
BENCHMARK(BM_TrainBatch)->Unit(benchmark::kMillisecond);

}  // namespace
