#include <benchmark/benchmark.h>

#include "symreg/nn/tensor.hpp"
#include "symreg/random.hpp"

using namespace symreg;

namespace {

nn::Mat<float> random_mat(int r, int c, Rng& rng) {
  nn::Mat<float> m(r, c);
  for (auto& v : m.data) v = static_cast<float>(uniform(rng, -1.0, 1.0));
  return m;
}

void BM_Gemm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  const auto a = random_mat(n, n, rng);
  const auto b = random_mat(n, n, rng);
  nn::Mat<float> c(n, n);
  for (auto _ : state) {
    nn::gemm(a, false, b, false, c, false);
    benchmark::DoNotOptimize(c.data.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * static_cast<std::int64_t>(n) * n * n);
}
BENCHMARK(BM_Gemm)->Arg(32)->Arg(64)->Arg(128)->Arg(256);

void BM_GemmTransposedB(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(2);
  const auto a = random_mat(n, n, rng);
  const auto b = random_mat(n, n, rng);
  nn::Mat<float> c(n, n);
  for (auto _ : state) {
    nn::gemm(a, false, b, true, c, false);
    benchmark::DoNotOptimize(c.data.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * static_cast<std::int64_t>(n) * n * n);
}
BENCHMARK(BM_GemmTransposedB)->Arg(64)->Arg(256);

}  // namespace
