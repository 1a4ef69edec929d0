#include <benchmark/benchmark.h>

#include "symreg/datagen.hpp"

using namespace symreg;

namespace {

void BM_TreeSample(benchmark::State& state) {
  const TreeSampler sampler(GeneratorConfig::defaults(1));
  Rng rng(4);
  const int n_ops = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(n_ops, rng));
}
BENCHMARK(BM_TreeSample)->Arg(4)->Arg(10);

void BM_GenerateRecord(benchmark::State& state) {
  const Generator gen(GeneratorConfig::defaults(static_cast<int>(state.range(0))));
  std::uint64_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gen.generate(i, derive_seed(5, i)));
    ++i;
  }
}
BENCHMARK(BM_GenerateRecord)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

}  // namespace
