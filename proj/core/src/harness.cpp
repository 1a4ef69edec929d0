#include "symreg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <thread>

#include "symreg/errors.hpp"
#include "symreg/eval.hpp"
#include "symreg/metrics.hpp"

namespace symreg {

Expression OraclePredictor::predict(const BenchmarkFunction& function, const PointSet&, std::uint64_t) const {
  return function.expr;
}

ModelPredictor::ModelPredictor(const nn::Model<float>& model, const Vocabulary& vocab, InferenceOptions options)
    : model_(model), vocab_(vocab), options_(std::move(options)) {}

Expression ModelPredictor::predict(const BenchmarkFunction&, const PointSet& points, std::uint64_t seed) const {
  InferenceOptions o = options_;
  o.seed = seed;
  return symreg::predict(model_, vocab_, points, o).expr;
}

namespace {

std::size_t registry_index(const BenchmarkFunction* f) {
  const auto& reg = benchmark_registry();
  for (std::size_t i = 0; i < reg.size(); ++i) {
    if (&reg[i] == f) return i;
  }
  return reg.size();
}

std::optional<double> mean_of(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::optional<double> median_of(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

FunctionResult run_one(const Predictor& predictor, const BenchmarkFunction& f, std::uint64_t seed) {
  FunctionResult row;
  row.suite = f.suite;
  row.id = f.id;
  row.dims = f.dims;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Rng rng(seed);
    SamplingPolicy policy;
    policy.dims = f.dims;
    auto sampled = sample_points(f.expr, policy, rng);
    if (auto* rej = std::get_if<Rejected>(&sampled)) {
      fail(ErrorCode::InvalidArgument, "no sampling interval gives finite values (" +
                                           std::string(reject_reason_name(rej->reason)) + ")");
    }
    const PointSet& points = std::get<PointSet>(sampled);
    row.intervals = points.intervals;
    const Expression predicted = predictor.predict(f, points, derive_seed(seed, 1));
    row.prediction = to_infix(predicted);
    const Eigen::VectorXd yhat = evaluate(predicted, points.inputs);
    row.r2 = r_squared(points.outputs, yhat).value;
    row.re = relative_error(points.outputs, yhat).value;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

}  // namespace

SuiteSummary summarize(const std::string& name, std::span<const FunctionResult> rows) {
  SuiteSummary s;
  s.suite = name;
  std::vector<double> r2, re;
  double secs = 0.0;
  for (const auto& r : rows) {
    ++s.functions;
    secs += r.seconds;
    if (!r.error.empty() || !r.r2) ++s.failures;
    if (r.r2) r2.push_back(*r.r2);
    if (r.re) re.push_back(*r.re);
  }
  s.mean_r2 = mean_of(r2);
  s.median_r2 = median_of(r2);
  s.mean_re = mean_of(re);
  s.median_re = median_of(re);
  s.mean_seconds = s.functions ? secs / static_cast<double>(s.functions) : 0.0;
  return s;
}

BenchmarkReport run_benchmark(const Predictor& predictor, std::span<const BenchmarkFunction* const> functions,
                              const BenchmarkOptions& options) {
  BenchmarkReport report;
  report.predictor = predictor.name();
  report.seed = options.seed;
  report.functions.resize(functions.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < functions.size();) {
      const auto* f = functions[i];
      report.functions[i] = run_one(predictor, *f, derive_seed(options.seed, registry_index(f)));
    }
  };
  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(functions.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::vector<std::string> order;
  for (const auto& r : report.functions) {
    if (std::find(order.begin(), order.end(), r.suite) == order.end()) order.push_back(r.suite);
  }
  for (const auto& suite : order) {
    std::vector<FunctionResult> rows;
    for (const auto& r : report.functions) {
      if (r.suite == suite) rows.push_back(r);
    }
    report.suites.push_back(summarize(suite, rows));
  }
  report.overall = summarize("Overall", report.functions);
  return report;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::optional<double> opt_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

nlohmann::json summary_json(const SuiteSummary& s) {
  return {{"suite", s.suite},           {"functions", s.functions},       {"failures", s.failures},
          {"mean_r2", opt(s.mean_r2)},  {"median_r2", opt(s.median_r2)},  {"mean_re", opt(s.mean_re)},
          {"median_re", opt(s.median_re)}, {"mean_seconds", s.mean_seconds}};
}

SuiteSummary summary_from(const nlohmann::json& j) {
  SuiteSummary s;
  s.suite = j.at("suite");
  s.functions = j.at("functions");
  s.failures = j.at("failures");
  s.mean_r2 = opt_from(j, "mean_r2");
  s.median_r2 = opt_from(j, "median_r2");
  s.mean_re = opt_from(j, "mean_re");
  s.median_re = opt_from(j, "median_re");
  s.mean_seconds = j.at("mean_seconds");
  return s;
}

}  // namespace

void to_json(nlohmann::json& j, const BenchmarkReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& f : r.functions) {
    std::vector<std::string> iv;
    for (auto i : f.intervals) iv.emplace_back(interval_name(i));
    rows.push_back({{"suite", f.suite},
                    {"id", f.id},
                    {"dims", f.dims},
                    {"intervals", iv},
                    {"r2", opt(f.r2)},
                    {"re", opt(f.re)},
                    {"seconds", f.seconds},
                    {"prediction", f.prediction},
                    {"error", f.error}});
  }
  nlohmann::json suites = nlohmann::json::array();
  for (const auto& s : r.suites) suites.push_back(summary_json(s));
  j = {{"format", "symreg-benchmark-report"},
       {"version", 1},
       {"predictor", r.predictor},
       {"seed", r.seed},
       {"functions", rows},
       {"suites", suites},
       {"overall", summary_json(r.overall)}};
}

void from_json(const nlohmann::json& j, BenchmarkReport& r) {
  if (j.value("format", std::string{}) != "symreg-benchmark-report") {
    fail(ErrorCode::InvalidArgument, "not a benchmark report");
  }
  r.predictor = j.at("predictor");
  r.seed = j.at("seed");
  r.functions.clear();
  for (const auto& f : j.at("functions")) {
    FunctionResult row;
    row.suite = f.at("suite");
    row.id = f.at("id");
    row.dims = f.at("dims");
    for (const auto& name : f.at("intervals")) {
      const std::string n = name;
      for (auto iv : {Interval::Full, Interval::Positive, Interval::Negative}) {
        if (interval_name(iv) == n) row.intervals.push_back(iv);
      }
    }
    row.r2 = opt_from(f, "r2");
    row.re = opt_from(f, "re");
    row.seconds = f.at("seconds");
    row.prediction = f.at("prediction");
    row.error = f.at("error");
    r.functions.push_back(std::move(row));
  }
  r.suites.clear();
  for (const auto& s : j.at("suites")) r.suites.push_back(summary_from(s));
  r.overall = summary_from(j.at("overall"));
}

namespace {

std::string fmt_opt(const std::optional<double>& v, const char* spec) {
  if (!v) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, *v);
  return buf;
}

std::string line(const char* spec, const std::string& a, const std::string& b, const std::string& c,
                 const std::string& d) {
  char buf[256];
  std::snprintf(buf, sizeof buf, spec, a.c_str(), b.c_str(), c.c_str(), d.c_str());
  return buf;
}

}  // namespace

std::string format_suite_table(const BenchmarkReport& report) {
  std::string out = "Predictor: " + report.predictor + "\n";
  out += line("%-12s %10s %10s %10s\n", "Benchmark", "R2 (mean)", "R2 (med)", "Time (s)");
  for (const auto& s : report.suites) {
    out += line("%-12s %10s %10s %10s\n", s.suite, fmt_opt(s.mean_r2, "%.4f"), fmt_opt(s.median_r2, "%.4f"),
                fmt_opt(s.mean_seconds, "%.2f"));
  }
  const auto& o = report.overall;
  out += line("%-12s %10s %10s %10s\n", o.suite, fmt_opt(o.mean_r2, "%.4f"), fmt_opt(o.median_r2, "%.4f"),
              fmt_opt(o.mean_seconds, "%.2f"));
  return out;
}

std::string format_function_table(const BenchmarkReport& report) {
  std::string out = line("%-14s %10s %10s %s\n", "Name", "R2", "Time (s)", "Prediction");
  for (const auto& f : report.functions) {
    const std::string pred = f.error.empty() ? f.prediction : "error: " + f.error;
    out += line("%-14s %10s %10s %s\n", f.id, fmt_opt(f.r2, "%.4f"), fmt_opt(f.seconds, "%.2f"), pred);
  }
  return out;
}

}  // namespace symreg
