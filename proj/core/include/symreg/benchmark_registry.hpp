#pragma once

#include <span>
#include <string>
#include <vector>

#include "symreg/expr.hpp"

namespace symreg {

struct BenchmarkFunction {
  std::string suite;
  std::string id;
  /// Source formula as written in the suite definition.
  std::string formula;
  /// Normalized ground truth.
  Expression expr;
  int dims = 1;
};

/// Univariate and bivariate functions of the Nguyen, R, Livermore, Koza,
/// Keijzer and Constant suites, in suite order.
const std::vector<BenchmarkFunction>& benchmark_registry();

std::vector<std::string> benchmark_suites();

/// Functions of the named suites (case-insensitive), registry order. Throws
/// InvalidArgument for unknown names; an empty list selects everything.
std::vector<const BenchmarkFunction*> select_benchmarks(std::span<const std::string> suites);

const BenchmarkFunction& find_benchmark(const std::string& id);

}  // namespace symreg
