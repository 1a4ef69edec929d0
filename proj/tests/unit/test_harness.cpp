#include <doctest.h>

#include <nlohmann/json.hpp>
#include <set>

#include "symreg/benchmark_registry.hpp"
#include "symreg/errors.hpp"
#include "symreg/eval.hpp"
#include "symreg/harness.hpp"

using namespace symreg;

namespace {

class FailingPredictor final : public Predictor {
 public:
  std::string name() const override { return "failing"; }
  Expression predict(const BenchmarkFunction& f, const PointSet&, std::uint64_t) const override {
    if (f.id == "Nguyen-2") fail(ErrorCode::AllCandidatesFailed, "nothing finite");
    return parse_infix("x");
  }
};

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("registry contents") {
    const auto& reg = benchmark_registry();
    CHECK(reg.size() == 59);
    std::set<std::string> ids;
    for (const auto& f : reg) {
      CHECK(ids.insert(f.id).second);
      CHECK(f.dims >= 1);
      CHECK(f.dims <= 2);
    }
    CHECK(benchmark_suites() == std::vector<std::string>{"Nguyen", "R", "Livermore", "Koza", "Keijzer", "Constant"});
    const std::string nguyen[] = {"nguyen"};
    CHECK(select_benchmarks(nguyen).size() == 12);
    CHECK(select_benchmarks({}).size() == 59);
    const double one[] = {1.0};
    CHECK(evaluate_at(find_benchmark("Nguyen-1").expr, one) == 3.0);
    CHECK_THROWS(find_benchmark("Nguyen-99"));
  }

  TEST_CASE("every function samples finitely") {
    for (const auto& f : benchmark_registry()) {
      Rng rng(1);
      SamplingPolicy p;
      p.dims = f.dims;
      CHECK_MESSAGE(std::holds_alternative<PointSet>(sample_points(f.expr, p, rng)), f.id);
    }
  }

  TEST_CASE("oracle predictor scores perfectly") {
    const auto all = select_benchmarks({});
    BenchmarkOptions o;
    o.seed = 3;
    const auto report = run_benchmark(OraclePredictor{}, all, o);
    REQUIRE(report.functions.size() == 59);
    for (const auto& f : report.functions) {
      CHECK_MESSAGE(f.error.empty(), f.id);
      REQUIRE(f.r2.has_value());
      CHECK(*f.r2 == 1.0);
    }
    CHECK(report.suites.size() == 6);
    CHECK(*report.overall.mean_r2 == 1.0);
    CHECK(report.overall.functions == 59);
    const auto& n8 = report.functions[7];
    CHECK(n8.id == "Nguyen-8");
    CHECK(n8.intervals == std::vector<Interval>{Interval::Positive});
    const auto table = format_suite_table(report);
    CHECK(table.find("Livermore") != std::string::npos);
    CHECK(table.find("Overall") != std::string::npos);
    CHECK(format_function_table(report).find("Keijzer-15") != std::string::npos);
  }

  TEST_CASE("report round trip and determinism") {
    const std::string suites[] = {"Nguyen", "Koza"};
    const auto fns = select_benchmarks(suites);
    BenchmarkOptions o;
    o.seed = 5;
    auto a = run_benchmark(OraclePredictor{}, fns, o);
    o.threads = 3;
    auto b = run_benchmark(OraclePredictor{}, fns, o);
    nlohmann::json ja = a, jb = b;
    for (auto* j : {&ja, &jb}) {
      for (auto& f : (*j)["functions"]) f["seconds"] = 0;
      for (auto& s : (*j)["suites"]) s["mean_seconds"] = 0;
      (*j)["overall"]["mean_seconds"] = 0;
    }
    CHECK(ja == jb);
    const nlohmann::json full = a;
    const BenchmarkReport back = full.get<BenchmarkReport>();
    CHECK(nlohmann::json(back) == full);
  }

  TEST_CASE("failures become rows") {
    const std::string suites[] = {"Nguyen"};
    const auto report = run_benchmark(FailingPredictor{}, select_benchmarks(suites), {});
    REQUIRE(report.functions.size() == 12);
    CHECK(report.functions[1].error.find("nothing finite") != std::string::npos);
    CHECK_FALSE(report.functions[1].r2.has_value());
    CHECK(report.functions[0].r2.has_value());
    CHECK(report.overall.failures == 1);
  }

  TEST_CASE("summaries") {
    std::vector<FunctionResult> rows(4);
    rows[0].r2 = 1.0;
    rows[1].r2 = 0.5;
    rows[2].r2 = 0.0;
    rows[3].error = "x";
    const auto s = summarize("S", rows);
    CHECK(s.functions == 4);
    CHECK(s.failures == 1);
    CHECK(*s.mean_r2 == doctest::Approx(0.5));
    CHECK(*s.median_r2 == 0.5);
  }
}
