#include "symreg/benchmark_registry.hpp"

#include <algorithm>
#include <cctype>

#include "symreg/errors.hpp"
#include "symreg/normalize.hpp"

namespace symreg {

namespace {

struct Entry {
  const char* suite;
  const char* id;
  const char* formula;
};

// sinh and cosh are written out through exp since the operator set has no
// hyperbolic functions.
constexpr Entry kEntries[] = {
    {"Nguyen", "Nguyen-1", "x^3 + x^2 + x"},
    {"Nguyen", "Nguyen-2", "x^4 + x^3 + x^2 + x"},
    {"Nguyen", "Nguyen-3", "x^5 + x^4 + x^3 + x^2 + x"},
    {"Nguyen", "Nguyen-4", "x^6 + x^5 + x^4 + x^3 + x^2 + x"},
    {"Nguyen", "Nguyen-5", "sin(x^2) * cos(x) - 1"},
    {"Nguyen", "Nguyen-6", "sin(x) + sin(x + x^2)"},
    {"Nguyen", "Nguyen-7", "ln(x + 1) + ln(x^2 + 1)"},
    {"Nguyen", "Nguyen-8", "sqrt(x)"},
    {"Nguyen", "Nguyen-9", "sin(x) + sin(y^2)"},
    {"Nguyen", "Nguyen-10", "2 * sin(x) * cos(y)"},
    {"Nguyen", "Nguyen-11", "x^y"},
    {"Nguyen", "Nguyen-12", "x^4 - x^3 + 1/2 * y^2 - y"},
    {"R", "R-1", "(x + 1)^3 / (x^2 - x + 1)"},
    {"R", "R-2", "(x^5 - 3 * x^3 + 1) / (x^2 + 1)"},
    {"R", "R-3", "(x^6 + x^5) / (x^4 + x^3 + x^2 + x + 1)"},
    {"Livermore", "Livermore-1", "1/3 + x + sin(x^2)"},
    {"Livermore", "Livermore-2", "sin(x^2) * cos(x) - 2"},
    {"Livermore", "Livermore-3", "sin(x^3) * cos(x^2) - 1"},
    {"Livermore", "Livermore-4", "ln(x + 1) + ln(x^2 + 1) + ln(x)"},
    {"Livermore", "Livermore-5", "x^4 - x^3 + x^2 - y"},
    {"Livermore", "Livermore-6", "4 * x^4 + 3 * x^3 + 2 * x^2 + x"},
    {"Livermore", "Livermore-7", "(exp(x) - exp(-x)) / 2"},
    {"Livermore", "Livermore-8", "(exp(x) + exp(-x)) / 2"},
    {"Livermore", "Livermore-9", "x^9 + x^8 + x^7 + x^6 + x^5 + x^4 + x^3 + x^2 + x"},
    {"Livermore", "Livermore-10", "6 * sin(x) * cos(y)"},
    {"Livermore", "Livermore-11", "x^2 * x^2 / (x + y)"},
    {"Livermore", "Livermore-12", "x^5 / y^3"},
    {"Livermore", "Livermore-13", "x^(1/3)"},
    {"Livermore", "Livermore-14", "x^3 + x^2 + x + sin(x) + sin(x^2)"},
    {"Livermore", "Livermore-15", "x^(1/5)"},
    {"Livermore", "Livermore-16", "x^(2/5)"},
    {"Livermore", "Livermore-17", "4 * sin(x) * cos(y)"},
    {"Livermore", "Livermore-18", "sin(x^2) * cos(x) - 5"},
    {"Livermore", "Livermore-19", "x^5 + x^4 + x^2 + x"},
    {"Livermore", "Livermore-20", "exp(-x^2)"},
    {"Livermore", "Livermore-21", "x^8 + x^7 + x^6 + x^5 + x^4 + x^3 + x^2 + x"},
    {"Livermore", "Livermore-22", "exp(-0.5 * x^2)"},
    {"Koza", "Koza-2", "x^5 - 2 * x^3 + x"},
    {"Koza", "Koza-3", "x^6 - 2 * x^4 + x^2"},
    {"Keijzer", "Keijzer-3", "0.3 * x * sin(2 * pi * x)"},
    {"Keijzer", "Keijzer-4", "x^3 * exp(-x) * cos(x) * sin(x) * (sin(x)^2 * cos(x) - 1)"},
    {"Keijzer", "Keijzer-6", "x * (x + 1) / 2"},
    {"Keijzer", "Keijzer-7", "ln(x)"},
    {"Keijzer", "Keijzer-8", "sqrt(x)"},
    {"Keijzer", "Keijzer-9", "ln(x + sqrt(x^2 + 1))"},
    {"Keijzer", "Keijzer-10", "x^y"},
    {"Keijzer", "Keijzer-11", "x * y + sin((x - 1) * (y - 1))"},
    {"Keijzer", "Keijzer-12", "x^4 - x^3 + y^2 / 2 - y"},
    {"Keijzer", "Keijzer-13", "6 * sin(x) * cos(y)"},
    {"Keijzer", "Keijzer-14", "8 / (2 + x^2 + y^2)"},
    {"Keijzer", "Keijzer-15", "x^3 / 5 + y^3 / 2 - y - x"},
    {"Constant", "Constant-1", "3.39 * x^3 + 2.12 * x^2 + 1.78 * x"},
    {"Constant", "Constant-2", "sin(x^2) * cos(x) - 0.75"},
    {"Constant", "Constant-3", "sin(1.5 * x) * cos(0.5 * y)"},
    {"Constant", "Constant-4", "2.7 * x^y"},
    {"Constant", "Constant-5", "sqrt(1.23 * x)"},
    {"Constant", "Constant-6", "x^0.426"},
    {"Constant", "Constant-7", "2 * sin(1.3 * x) * cos(y)"},
    {"Constant", "Constant-8", "ln(x + 1.4) + ln(x^2 + 1.3)"},
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<BenchmarkFunction> build() {
  std::vector<BenchmarkFunction> out;
  for (const auto& e : kEntries) {
    Expression expr = normalize(parse_infix(e.formula));
    const int dims = std::max(1, max_variable_index(expr) + 1);
    out.push_back({e.suite, e.id, e.formula, std::move(expr), dims});
  }
  return out;
}

}  // namespace

const std::vector<BenchmarkFunction>& benchmark_registry() {
  static const std::vector<BenchmarkFunction> registry = build();
  return registry;
}

std::vector<std::string> benchmark_suites() {
  std::vector<std::string> out;
  for (const auto& e : kEntries) {
    if (std::find(out.begin(), out.end(), e.suite) == out.end()) out.emplace_back(e.suite);
  }
  return out;
}

std::vector<const BenchmarkFunction*> select_benchmarks(std::span<const std::string> suites) {
  std::vector<std::string> wanted;
  const auto known = benchmark_suites();
  for (const auto& s : suites) {
    const auto l = lower(s);
    const bool ok = std::any_of(known.begin(), known.end(), [&](const std::string& k) { return lower(k) == l; });
    if (!ok) fail(ErrorCode::InvalidArgument, "unknown benchmark suite: " + s);
    wanted.push_back(l);
  }
  std::vector<const BenchmarkFunction*> out;
  for (const auto& f : benchmark_registry()) {
    if (wanted.empty() || std::find(wanted.begin(), wanted.end(), lower(f.suite)) != wanted.end()) out.push_back(&f);
  }
  return out;
}

const BenchmarkFunction& find_benchmark(const std::string& id) {
  const auto l = lower(id);
  for (const auto& f : benchmark_registry()) {
    if (lower(f.id) == l) return f;
  }
  fail(ErrorCode::InvalidArgument, "unknown benchmark function: " + id);
}

}  // namespace symreg
