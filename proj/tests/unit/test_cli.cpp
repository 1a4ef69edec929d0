#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cli.hpp"
#include "symreg/errors.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "symreg");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = symreg::cli::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path dir() {
  static const fs::path d = [] {
    auto p = fs::temp_directory_path() / "symreg_unit" / "cli";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 2") {
    CHECK(run({"benchmark", "--bogus"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"generate", "--count", "3"}).code == 2);
    const auto r = run({"frobnicate"});
    CHECK(r.code == 2);
    CHECK(r.err.find("Usage") != std::string::npos);
    CHECK(run({"--help"}).code == 0);
  }

  TEST_CASE("benchmark json report") {
    const auto r = run({"benchmark", "--predictor", "oracle", "--suites", "nguyen", "--json"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["functions"].size() == 12);
    CHECK(j["overall"]["mean_r2"] == 1.0);
    const auto t = run({"benchmark", "--predictor", "oracle", "--suites", "constant,koza", "--per-function"});
    CHECK(t.out.find("Constant-8") != std::string::npos);
    CHECK(t.out.find("Koza") != std::string::npos);
  }

  TEST_CASE("domain errors map to their codes") {
    CHECK(run({"corpus-stats", (dir() / "missing.jsonl").string()}).code == static_cast<int>(symreg::ErrorCode::Io));
    CHECK(run({"benchmark", "--predictor", "model"}).code == static_cast<int>(symreg::ErrorCode::InvalidArgument));
    CHECK(run({"eval-ood", "--truth", "ln(x)", "--predicted", "sqrt(25 - x^2)"}).code ==
          static_cast<int>(symreg::ErrorCode::FewerThanHalfFinite));
  }

  TEST_CASE("generate, stats, train, infer") {
    const auto corpus = (dir() / "c.jsonl.gz").string();
    REQUIRE(run({"--seed", "2", "generate", "--count", "64", "--max-ops", "3", "--out", corpus}).code == 0);
    const auto stats = run({"corpus-stats", corpus});
    REQUIRE(stats.code == 0);
    CHECK(stats.out.find("expected") != std::string::npos);
    CHECK(stats.out.find("sqrt") != std::string::npos);
    const auto js = run({"--json", "corpus-stats", corpus});
    CHECK(nlohmann::json::parse(js.out)["records"] == 64);

    const auto out = (dir() / "model").string();
    const auto train = run({"train", "--corpus", corpus, "--preset", "tiny", "--epochs", "1", "--batch-size", "16",
                            "--out", out});
    REQUIRE(train.code == 0);
    CHECK(fs::exists(fs::path(out) / "checkpoint.bin"));
    CHECK(fs::exists(fs::path(out) / "train_log.jsonl"));

    const auto csv = dir() / "points.csv";
    {
      std::ofstream f(csv);
      f << "x,f\n";
      for (int i = 1; i <= 30; ++i) f << i * 0.1 << "," << (i * 0.1) * (i * 0.1) << "\n";
    }
    const auto report = (dir() / "report.json").string();
    const auto inf = run({"infer", "--checkpoint", (fs::path(out) / "checkpoint.bin").string(), "--points",
                          csv.string(), "--samples", "8", "--report", report});
    REQUIRE(inf.code == 0);
    std::ifstream rf(report);
    const auto doc = nlohmann::json::parse(rf);
    CHECK(doc["rollouts"] == 8);
    CHECK(doc.contains("best"));

    std::ofstream(dir() / "bad.csv") << "x,f\n1,abc\n";
    CHECK(run({"infer", "--checkpoint", (fs::path(out) / "checkpoint.bin").string(), "--points",
               (dir() / "bad.csv").string()})
              .code == static_cast<int>(symreg::ErrorCode::InvalidArgument));
  }

  TEST_CASE("config file supplies options") {
    const auto cfg = dir() / "bench.ini";
    std::ofstream(cfg) << "seed=4\n[benchmark]\npredictor=oracle\nsuites=R\n";
    const auto r = run({"--config", cfg.string(), "--json", "benchmark"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["seed"] == 4);
    CHECK(j["functions"].size() == 3);
  }

  TEST_CASE("eval-ood with explicit formulas") {
    const auto r = run({"--json", "eval-ood", "--truth", "x^2", "--predicted", "x*x", "--d", "3"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["r2"] == 1.0);
    CHECK(j["re"].get<double>() < 1e-12);
  }
}
