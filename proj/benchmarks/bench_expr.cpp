#include <benchmark/benchmark.h>

#include "symreg/benchmark_registry.hpp"
#include "symreg/const_opt.hpp"
#include "symreg/eval.hpp"
#include "symreg/sampling.hpp"

using namespace symreg;

namespace {

PointSet points_for(const Expression& e, int dims) {
  Rng rng(3);
  SamplingPolicy policy;
  policy.dims = dims;
  return std::get<PointSet>(sample_points(e, policy, rng));
}

void BM_CompiledEvaluate(benchmark::State& state) {
  const auto& f = find_benchmark("Keijzer-4");
  const auto ps = points_for(f.expr, f.dims);
  const CompiledExpression compiled(f.expr);
  for (auto _ : state) benchmark::DoNotOptimize(compiled.evaluate(ps.inputs, compiled.initial_constants()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ps.size()));
}
BENCHMARK(BM_CompiledEvaluate);

void BM_LossAndGradient(benchmark::State& state) {
  const auto& f = find_benchmark("Constant-8");
  const auto ps = points_for(f.expr, f.dims);
  const CompiledExpression compiled(f.expr);
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss_and_gradient(compiled, ps.inputs, ps.outputs, compiled.initial_constants()));
  }
}
BENCHMARK(BM_LossAndGradient);

void BM_Refine(benchmark::State& state) {
  const auto& f = find_benchmark("Constant-1");
  const auto ps = points_for(f.expr, f.dims);
  std::vector<double> c = constant_values(f.expr);
  for (auto& v : c) v *= 1.5;
  const Expression start = with_constant_values(f.expr, c);
  for (auto _ : state) benchmark::DoNotOptimize(refine(start, ps));
}
BENCHMARK(BM_Refine)->Unit(benchmark::kMillisecond);

}  // namespace
