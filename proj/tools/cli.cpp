#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <thread>

#include "symreg/benchmark_registry.hpp"
#include "symreg/corpus.hpp"
#include "symreg/errors.hpp"
#include "symreg/eval.hpp"
#include "symreg/harness.hpp"
#include "symreg/inference.hpp"
#include "symreg/nn/batch.hpp"
#include "symreg/nn/checkpoint.hpp"
#include "symreg/nn/train.hpp"
#include "symreg/normalize.hpp"

namespace symreg::cli {
namespace {

using nlohmann::json;

struct Globals {
  std::uint64_t seed = 0;
  int threads = 1;
  bool json = false;
};

std::string fixed(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

// ---- generate

struct GenerateArgs {
  int dims = 1;
  std::uint64_t count = 0;
  std::string out;
  int max_ops = 10;
  std::string mode = "extended";
};

int run_generate(const GenerateArgs& a, const Globals& g, std::ostream& out) {
  GeneratorConfig config = GeneratorConfig::defaults(a.dims);
  config.max_operators = a.max_ops;
  config.encoding = encoding_mode_from_name(a.mode);
  config.validate();
  const CorpusStats stats = write_corpus(a.out, config, a.count, g.threads, g.seed);
  if (g.json) {
    out << json{{"path", a.out}, {"stats", stats}}.dump(2) << '\n';
  } else {
    out << "wrote " << stats.records << " records to " << a.out << " (acceptance rate "
        << fixed("%.3f", stats.acceptance_rate()) << ")\n";
  }
  return 0;
}

// ---- train

struct TrainArgs {
  std::string corpus;
  std::string preset = "desk";
  int epochs = 1;
  std::string out;
  int batch_size = 32;
  std::int64_t max_steps = 0;
  std::int64_t warmup = 1000;
  int log_interval = 50;
  std::int64_t checkpoint_interval = 1000;
};

int run_train(const TrainArgs& a, const Globals& g, std::ostream& out) {
  CorpusReader header_probe(a.corpus);
  const Vocabulary& vocab = header_probe.vocabulary();
  nn::ModelConfig config = nn::ModelConfig::preset(a.preset);
  config.encoding = vocab.mode();
  config.n_variables = vocab.n_variables();
  config.vocab_size = static_cast<int>(vocab.size());
  config.validate();
  const auto data = nn::load_training_examples(a.corpus, vocab);
  nn::Model<float> model(config, derive_seed(g.seed, 0));
  nn::TrainOptions opts;
  opts.epochs = a.epochs;
  opts.batch_size = a.batch_size;
  opts.max_steps = a.max_steps;
  opts.warmup_steps = a.warmup;
  opts.log_interval = a.log_interval;
  opts.checkpoint_interval = a.checkpoint_interval;
  opts.seed = g.seed;
  opts.out_dir = a.out;
  nn::Trainer trainer(model, data, vocab, opts);
  const nn::TrainingReport report = trainer.run();
  if (g.json) {
    out << json(report).dump(2) << '\n';
  } else {
    out << "trained " << report.steps << "/" << report.total_steps << " steps in " << fixed("%.1f", report.seconds)
        << " s; cross-entropy " << fixed("%.4f", report.first_ce) << " -> " << fixed("%.4f", report.final_ce)
        << "; checkpoint in " << a.out << "\n";
  }
  return 0;
}

// ---- infer

struct InferArgs {
  std::string checkpoint;
  std::string points;
  int k = 20;
  int samples = 256;
  double temperature = 1.0;
  bool no_refine = false;
  std::string report;
};

PointSet read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open points file: " + path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::InvalidArgument, "points file is empty: " + path);
  const auto columns = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
  if (columns < 2 || columns > 3) fail(ErrorCode::InvalidArgument, "points file needs x[,y],f columns");
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::vector<double> row;
    for (std::string cell; std::getline(ss, cell, ',');) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        fail(ErrorCode::InvalidArgument, "bad number on line " + std::to_string(line_no) + ": " + cell);
      }
    }
    if (static_cast<int>(row.size()) != columns) {
      fail(ErrorCode::InvalidArgument, "wrong column count on line " + std::to_string(line_no));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::InvalidArgument, "points file has no data rows");
  PointSet ps;
  const int dims = columns - 1;
  ps.inputs.resize(static_cast<Eigen::Index>(rows.size()), dims);
  ps.outputs.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int d = 0; d < dims; ++d) ps.inputs(static_cast<Eigen::Index>(i), d) = rows[i][static_cast<std::size_t>(d)];
    ps.outputs[static_cast<Eigen::Index>(i)] = rows[i].back();
  }
  ps.intervals.assign(static_cast<std::size_t>(dims), Interval::Full);
  return ps;
}

struct LoadedModel {
  Vocabulary vocab;
  std::unique_ptr<nn::Model<float>> model;
};

LoadedModel load(const std::string& path) {
  const nn::Checkpoint ckpt = nn::read_checkpoint(path);
  LoadedModel m{Vocabulary::standard(ckpt.config.encoding, ckpt.config.n_variables), nullptr};
  m.model = nn::load_model<float>(path, m.vocab);
  return m;
}

InferenceOptions inference_options(int k, int samples, double temperature, bool no_refine, const Globals& g) {
  InferenceOptions o;
  o.top_k = k;
  o.n_samples = samples;
  o.temperature = temperature;
  o.refine_enabled = !no_refine;
  o.seed = g.seed;
  o.threads = g.threads;
  return o;
}

int run_infer(const InferArgs& a, const Globals& g, std::ostream& out) {
  const LoadedModel m = load(a.checkpoint);
  const PointSet points = read_points_csv(a.points);
  const InferenceOptions opts = inference_options(a.k, a.samples, a.temperature, a.no_refine, g);
  const Prediction p = predict(*m.model, m.vocab, points, opts);
  const json doc = report_to_json(p.report, m.vocab);
  if (!a.report.empty()) {
    std::ofstream f(a.report);
    if (!f) fail(ErrorCode::Io, "cannot write report: " + a.report);
    f << doc.dump(2) << '\n';
  }
  if (g.json) {
    out << doc.dump(2) << '\n';
  } else {
    out << to_infix(p.expr) << "\nmse " << fixed("%.6g", p.mse) << " (" << p.report.candidates.size()
        << " unique candidates from " << p.report.rollouts << " rollouts)\n";
  }
  return 0;
}

// ---- benchmark

struct BenchmarkArgs {
  std::string predictor = "model";
  std::string checkpoint;
  std::vector<std::string> suites;
  int k = 20;
  int samples = 1024;
  bool no_refine = false;
  bool per_function = false;
  std::string report;
};

int run_bench(const BenchmarkArgs& a, const Globals& g, std::ostream& out) {
  const auto functions = select_benchmarks(a.suites);
  BenchmarkOptions bo;
  bo.seed = g.seed;
  bo.threads = g.threads;
  BenchmarkReport report;
  if (a.predictor == "oracle") {
    report = run_benchmark(OraclePredictor{}, functions, bo);
  } else {
    if (a.checkpoint.empty()) fail(ErrorCode::InvalidArgument, "--predictor model needs --checkpoint");
    const LoadedModel m = load(a.checkpoint);
    InferenceOptions io = inference_options(a.k, a.samples, 1.0, a.no_refine, g);
    io.threads = 1;
    report = run_benchmark(ModelPredictor(*m.model, m.vocab, io), functions, bo);
  }
  const json doc = report;
  if (!a.report.empty()) {
    std::ofstream f(a.report);
    if (!f) fail(ErrorCode::Io, "cannot write report: " + a.report);
    f << doc.dump(2) << '\n';
  }
  if (g.json) {
    out << doc.dump(2) << '\n';
  } else {
    out << format_suite_table(report);
    if (a.per_function) out << '\n' << format_function_table(report);
  }
  return 0;
}

// ---- eval-ood

struct OodArgs {
  std::string truth;
  std::string predicted;
  std::string checkpoint;
  double d = 1.0;
  int points = 100;
  int k = 20;
  int samples = 256;
};

int run_ood(const OodArgs& a, const Globals& g, std::ostream& out) {
  const Expression truth = normalize(parse_infix(a.truth));
  const int dims = std::max(1, CompiledExpression(truth).required_dims());
  auto make_prediction = [&]() -> Expression {
    if (!a.predicted.empty()) return normalize(parse_infix(a.predicted));
    if (a.checkpoint.empty()) fail(ErrorCode::InvalidArgument, "eval-ood needs --predicted or --checkpoint");
    const LoadedModel m = load(a.checkpoint);
    Rng rng(derive_seed(g.seed, 0));
    SamplingPolicy policy;
    policy.dims = dims;
    auto sampled = sample_points(truth, policy, rng);
    if (std::holds_alternative<Rejected>(sampled)) {
      fail(ErrorCode::InvalidArgument, "cannot sample finite in-domain points for the ground truth");
    }
    return predict(*m.model, m.vocab, std::get<PointSet>(sampled), inference_options(a.k, a.samples, 1.0, false, g))
        .expr;
  };
  const Expression predicted = make_prediction();
  Rng rng(derive_seed(g.seed, 1));
  const OodResult r = evaluate_ood(predicted, truth, a.d, a.points, dims, rng);
  auto opt = [](const Metric& m) { return m.value ? json(*m.value) : json(nullptr); };
  if (g.json) {
    out << json{{"truth", to_infix(truth)},
                {"predicted", to_infix(predicted)},
                {"d", a.d},
                {"re", opt(r.relative_error)},
                {"r2", opt(r.r_squared)},
                {"finite", r.finite},
                {"total", r.total},
                {"valid", r.valid}}
               .dump(2)
        << '\n';
  } else {
    auto show = [](const Metric& m) { return m.value ? fixed("%.6g", *m.value) : std::string("n/a"); };
    out << "predicted " << to_infix(predicted) << "\nd " << a.d << ": RE " << show(r.relative_error) << ", R2 "
        << show(r.r_squared) << " (" << r.finite << "/" << r.total << " finite)\n";
  }
  if (!r.valid) fail(ErrorCode::FewerThanHalfFinite, "fewer than half of the out-of-domain points are finite");
  return 0;
}

// ---- corpus-stats

int run_stats(const std::string& path, const Globals& g, std::ostream& out) {
  CorpusReader reader(path);
  std::uint64_t records = 0, tokens = 0;
  while (auto r = reader.next()) {
    ++records;
    tokens += r->tokens.symbols.size();
  }
  const CorpusFooter& footer = reader.footer();
  if (!footer.complete || !footer.stats) fail(ErrorCode::CorpusFormat, "corpus has no completion statistics");
  const CorpusStats& s = *footer.stats;
  const GeneratorConfig& cfg = reader.header().generator;

  struct Row {
    std::string group, name;
    double expected, observed;
    std::uint64_t count;
  };
  std::vector<Row> rows;
  auto add_ops = [&](const std::vector<WeightedOp>& ops, std::uint64_t total, const char* group) {
    double wsum = 0;
    for (const auto& w : ops) wsum += w.weight;
    for (const auto& w : ops) {
      const auto idx = static_cast<std::size_t>(std::find(std::begin(kAllOps), std::end(kAllOps), w.op) - std::begin(kAllOps));
      const std::uint64_t c = s.draws.op_counts[idx];
      rows.push_back({group, std::string(op_name(w.op)), w.weight / wsum,
                      total ? static_cast<double>(c) / static_cast<double>(total) : 0.0, c});
    }
  };
  add_ops(cfg.binary_ops, s.draws.binary_nodes, "binary");
  add_ops(cfg.unary_ops, s.draws.unary_nodes, "unary");
  const double leaf_w[] = {cfg.leaves.variable, cfg.leaves.integer, cfg.leaves.real, cfg.leaves.zero};
  double leaf_sum = 0;
  std::uint64_t leaf_total = 0;
  for (std::size_t i = 0; i < kLeafClassCount; ++i) {
    leaf_sum += leaf_w[i];
    leaf_total += s.draws.leaf_counts[i];
  }
  for (std::size_t i = 0; i < kLeafClassCount; ++i) {
    const std::uint64_t c = s.draws.leaf_counts[i];
    rows.push_back({"leaf", std::string(leaf_class_name(static_cast<LeafClass>(i))), leaf_w[i] / leaf_sum,
                    leaf_total ? static_cast<double>(c) / static_cast<double>(leaf_total) : 0.0, c});
  }

  if (g.json) {
    json frequencies = json::array();
    for (const auto& r : rows) {
      frequencies.push_back(
          {{"group", r.group}, {"name", r.name}, {"expected", r.expected}, {"observed", r.observed}, {"count", r.count}});
    }
    out << json{{"records", records},
                {"mean_tokens", records ? static_cast<double>(tokens) / static_cast<double>(records) : 0.0},
                {"stats", s},
                {"frequencies", frequencies}}
               .dump(2)
        << '\n';
    return 0;
  }
  out << records << " records, " << fixed("%.2f", records ? static_cast<double>(tokens) / records : 0.0)
      << " symbols per record, acceptance rate " << fixed("%.3f", s.acceptance_rate()) << "\n\n";
  out << pad("group", 8) << pad("symbol", 12) << pad("expected", 10) << pad("observed", 10) << pad("diff", 10)
      << "count\n";
  for (const auto& r : rows) {
    out << pad(r.group, 8) << pad(r.name, 12) << pad(fixed("%.4f", r.expected), 10)
        << pad(fixed("%.4f", r.observed), 10) << pad(fixed("%+.4f", r.observed - r.expected), 10) << r.count << '\n';
  }
  out << "\nrejections\n";
  for (std::size_t i = 0; i < std::size(kAllRejectReasons); ++i) {
    out << "  " << pad(std::string(reject_reason_name(kAllRejectReasons[i])), 20) << s.rejections[i] << '\n';
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Symbolic regression with a transformer: data generation, training, inference and benchmarks",
               "symreg"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from a key=value file ([subcommand] sections allowed)");

  Globals g;
  app.add_option("--seed", g.seed, "Base seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_flag("--json", g.json, "Machine-readable output");

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Generate a training corpus");
  gen->add_option("--dims", ga.dims, "Input dimensions")->check(CLI::IsMember({1, 2}))->capture_default_str();
  gen->add_option("--count", ga.count, "Number of records")->required();
  gen->add_option("--out", ga.out, "Output path (.gz for compression)")->required();
  gen->add_option("--max-ops", ga.max_ops, "Maximum operators per expression")->capture_default_str();
  gen->add_option("--mode", ga.mode, "Constant encoding")
      ->check(CLI::IsMember({"extended", "base"}))
      ->capture_default_str();

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a model on a corpus");
  train->add_option("--corpus", ta.corpus, "Corpus path")->required();
  train->add_option("--preset", ta.preset, "Model size")
      ->check(CLI::IsMember({"desk", "full", "tiny"}))
      ->capture_default_str();
  train->add_option("--epochs", ta.epochs, "Epochs")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--out", ta.out, "Output directory")->required();
  train->add_option("--batch-size", ta.batch_size, "Batch size")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--max-steps", ta.max_steps, "Stop after this many steps (0: no limit)")->capture_default_str();
  train->add_option("--warmup", ta.warmup, "Learning-rate warmup steps")->capture_default_str();
  train->add_option("--log-interval", ta.log_interval, "Steps per log line")->capture_default_str();
  train->add_option("--checkpoint-interval", ta.checkpoint_interval, "Steps per checkpoint")->capture_default_str();

  InferArgs ia;
  auto* infer = app.add_subcommand("infer", "Predict a formula for a CSV point file");
  infer->add_option("--checkpoint", ia.checkpoint, "Checkpoint path")->required();
  infer->add_option("--points", ia.points, "CSV with header and x[,y],f columns")->required();
  infer->add_option("--k", ia.k, "Top-K")->capture_default_str();
  infer->add_option("--samples", ia.samples, "Rollouts")->capture_default_str();
  infer->add_option("--temperature", ia.temperature, "Sampling temperature")->capture_default_str();
  infer->add_flag("--no-refine", ia.no_refine, "Skip constant refinement");
  infer->add_option("--report", ia.report, "Write the full candidate report here");

  BenchmarkArgs ba;
  auto* bench = app.add_subcommand("benchmark", "Score a predictor on the benchmark suites");
  bench->add_option("--predictor", ba.predictor, "Predictor")
      ->check(CLI::IsMember({"model", "oracle"}))
      ->capture_default_str();
  bench->add_option("--checkpoint", ba.checkpoint, "Checkpoint path (model predictor)");
  bench->add_option("--suites", ba.suites, "Suites to run (default: all)")->delimiter(',');
  bench->add_option("--k", ba.k, "Top-K")->capture_default_str();
  bench->add_option("--samples", ba.samples, "Rollouts per function")->capture_default_str();
  bench->add_flag("--no-refine", ba.no_refine, "Skip constant refinement");
  bench->add_flag("--per-function", ba.per_function, "Also print the per-function table");
  bench->add_option("--report", ba.report, "Write the JSON report here");

  OodArgs oa;
  auto* ood = app.add_subcommand("eval-ood", "Compare a prediction with the truth outside the sampling range");
  ood->add_option("--truth", oa.truth, "Ground-truth formula")->required();
  ood->add_option("--predicted", oa.predicted, "Predicted formula");
  ood->add_option("--checkpoint", oa.checkpoint, "Predict with this checkpoint instead");
  ood->add_option("--d", oa.d, "Distance beyond the training range")->capture_default_str()->check(
      CLI::PositiveNumber);
  ood->add_option("--points", oa.points, "Number of points")->capture_default_str();
  ood->add_option("--k", oa.k, "Top-K")->capture_default_str();
  ood->add_option("--samples", oa.samples, "Rollouts")->capture_default_str();

  std::string stats_path;
  auto* stats = app.add_subcommand("corpus-stats", "Compare corpus operator frequencies with the generator tables");
  stats->add_option("path", stats_path, "Corpus path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  try {
    if (*gen) return run_generate(ga, g, out);
    if (*train) return run_train(ta, g, out);
    if (*infer) return run_infer(ia, g, out);
    if (*bench) return run_bench(ba, g, out);
    if (*ood) return run_ood(oa, g, out);
    if (*stats) return run_stats(stats_path, g, out);
  } catch (const Error& e) {
    err << "error [" << error_code_name(e.code()) << "]: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return kUsageError;
}

}  // namespace symreg::cli
