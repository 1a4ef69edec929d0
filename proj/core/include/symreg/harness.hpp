#pragma once

#include <cstdint>
#include <memory>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "symreg/benchmark_registry.hpp"
#include "symreg/inference.hpp"
#include "symreg/sampling.hpp"

namespace symreg {

/// Anything that maps a point set to a formula.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::string name() const = 0;
  /// Must be safe to call concurrently.
  virtual Expression predict(const BenchmarkFunction& function, const PointSet& points, std::uint64_t seed) const = 0;
};

/// Returns the ground truth; checks the harness end to end.
class OraclePredictor final : public Predictor {
 public:
  std::string name() const override { return "oracle"; }
  Expression predict(const BenchmarkFunction& function, const PointSet& points, std::uint64_t seed) const override;
};

class ModelPredictor final : public Predictor {
 public:
  ModelPredictor(const nn::Model<float>& model, const Vocabulary& vocab, InferenceOptions options);
  std::string name() const override { return "model"; }
  Expression predict(const BenchmarkFunction& function, const PointSet& points, std::uint64_t seed) const override;

 private:
  const nn::Model<float>& model_;
  const Vocabulary& vocab_;
  InferenceOptions options_;
};

struct BenchmarkOptions {
  std::uint64_t seed = 0;
  int threads = 1;
};

struct FunctionResult {
  std::string suite;
  std::string id;
  int dims = 1;
  std::vector<Interval> intervals;
  std::optional<double> r2;
  std::optional<double> re;
  double seconds = 0.0;
  std::string prediction;
  std::string error;
};

struct SuiteSummary {
  std::string suite;
  std::size_t functions = 0;
  std::size_t failures = 0;
  std::optional<double> mean_r2;
  std::optional<double> median_r2;
  std::optional<double> mean_re;
  std::optional<double> median_re;
  double mean_seconds = 0.0;
};

struct BenchmarkReport {
  std::string predictor;
  std::uint64_t seed = 0;
  std::vector<FunctionResult> functions;
  std::vector<SuiteSummary> suites;
  SuiteSummary overall;
};

/// Samples each function's points from a stream seeded by (seed, registry
/// index), predicts, and scores R^2 and RE on those points. Failures become
/// rows with an error and no metrics.
BenchmarkReport run_benchmark(const Predictor& predictor, std::span<const BenchmarkFunction* const> functions,
                              const BenchmarkOptions& options);

SuiteSummary summarize(const std::string& name, std::span<const FunctionResult> rows);

void to_json(nlohmann::json& j, const BenchmarkReport& r);
void from_json(const nlohmann::json& j, BenchmarkReport& r);

/// Suite rows with R^2 and time columns (means per suite, medians alongside).
std::string format_suite_table(const BenchmarkReport& report);
/// One row per function with R^2 and time.
std::string format_function_table(const BenchmarkReport& report);

}  // namespace symreg
