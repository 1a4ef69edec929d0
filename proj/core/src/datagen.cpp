#include "symreg/datagen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <nlohmann/json.hpp>
#include <thread>

#include "symreg/errors.hpp"
#include "symreg/normalize.hpp"

namespace symreg {

std::string_view leaf_class_name(LeafClass c) {
  switch (c) {
    case LeafClass::Variable: return "variable";
    case LeafClass::Integer: return "integer";
    case LeafClass::Real: return "float";
    case LeafClass::Zero: return "zero";
  }
  return "?";
}

GeneratorConfig GeneratorConfig::defaults(int dims) {
  GeneratorConfig c;
  c.dims = dims;
  c.sampling.dims = dims;
  c.unary_ops = {
      {Op::Pow2, 8}, {Op::Pow3, 6}, {Op::Pow4, 4}, {Op::Pow5, 4}, {Op::Pow6, 3}, {Op::Inv, 8},
      {Op::Sqrt, 8}, {Op::Exp, 2},  {Op::Ln, 4},   {Op::Sin, 4},  {Op::Cos, 4},  {Op::Tan, 2},
      {Op::Cot, 2},  {Op::Asin, 1}, {Op::Acos, 1}, {Op::Atan, 1}, {Op::Acot, 1},
  };
  c.binary_ops = {{Op::Add, 8}, {Op::Sub, 5}, {Op::Mul, 8}, {Op::Div, 5}, {Op::Pow, 2}};
  return c;
}

void GeneratorConfig::validate() const {
  if (dims < 1 || dims > 2) fail(ErrorCode::InvalidArgument, "dims must be 1 or 2");
  if (sampling.dims != dims) fail(ErrorCode::InvalidArgument, "sampling policy dims differ from generator dims");
  if (min_operators < 1 || max_operators < min_operators) {
    fail(ErrorCode::InvalidArgument, "operator count range must satisfy 1 <= min <= max");
  }
  if (binary_ops.empty() && unary_ops.empty()) fail(ErrorCode::InvalidArgument, "no operators configured");
  for (const auto& w : unary_ops) {
    if (!(w.weight > 0.0) || arity(w.op) != 1) fail(ErrorCode::InvalidArgument, "bad unary operator weight");
  }
  for (const auto& w : binary_ops) {
    if (!(w.weight > 0.0) || arity(w.op) != 2) fail(ErrorCode::InvalidArgument, "bad binary operator weight");
  }
  if (leaves.variable < 0 || leaves.integer < 0 || leaves.real < 0 || leaves.zero < 0 ||
      leaves.variable + leaves.integer + leaves.real + leaves.zero <= 0) {
    fail(ErrorCode::InvalidArgument, "bad leaf weights");
  }
  if (max_attempts < 1) fail(ErrorCode::InvalidArgument, "max_attempts must be positive");
}

namespace {

nlohmann::json ops_to_json(const std::vector<WeightedOp>& ops) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& w : ops) out.push_back({std::string(op_name(w.op)), w.weight});
  return out;
}

std::vector<WeightedOp> ops_from_json(const nlohmann::json& j) {
  std::vector<WeightedOp> out;
  for (const auto& entry : j) {
    const auto name = entry.at(0).get<std::string>();
    auto op = op_from_name(name);
    if (!op) fail(ErrorCode::CorpusFormat, "unknown operator in generator config: " + name);
    out.push_back({*op, entry.at(1).get<double>()});
  }
  return out;
}

}  // namespace

void to_json(nlohmann::json& j, const GeneratorConfig& c) {
  j = nlohmann::json{
      {"max_operators", c.max_operators},
      {"min_operators", c.min_operators},
      {"dims", c.dims},
      {"unary_ops", ops_to_json(c.unary_ops)},
      {"binary_ops", ops_to_json(c.binary_ops)},
      {"leaves", {{"variable", c.leaves.variable}, {"integer", c.leaves.integer}, {"float", c.leaves.real},
                  {"zero", c.leaves.zero}}},
      {"unary_weight", c.unary_weight},
      {"binary_weight", c.binary_weight},
      {"max_tokens", c.max_tokens},
      {"max_attempts", c.max_attempts},
      {"points_1d", c.sampling.points_1d},
      {"points_2d", c.sampling.points_2d},
      {"max_abs_value", c.sampling.max_abs_value},
      {"encoding", std::string(encoding_mode_name(c.encoding))},
  };
}

void from_json(const nlohmann::json& j, GeneratorConfig& c) {
  c = GeneratorConfig{};
  c.max_operators = j.at("max_operators").get<int>();
  c.min_operators = j.value("min_operators", 1);
  c.dims = j.at("dims").get<int>();
  c.unary_ops = ops_from_json(j.at("unary_ops"));
  c.binary_ops = ops_from_json(j.at("binary_ops"));
  const auto& l = j.at("leaves");
  c.leaves = {l.at("variable").get<double>(), l.at("integer").get<double>(), l.at("float").get<double>(),
              l.at("zero").get<double>()};
  c.unary_weight = j.value("unary_weight", 1.0);
  c.binary_weight = j.value("binary_weight", 1.0);
  c.max_tokens = j.value("max_tokens", kMaxTokens);
  c.max_attempts = j.value("max_attempts", 10000);
  c.sampling.dims = c.dims;
  c.sampling.points_1d = j.value("points_1d", 100);
  c.sampling.points_2d = j.value("points_2d", 200);
  c.sampling.max_abs_value = j.value("max_abs_value", 1e7);
  c.encoding = encoding_mode_from_name(j.value("encoding", std::string("extended")));
}

void DrawStats::merge(const DrawStats& other) {
  for (std::size_t i = 0; i < op_counts.size(); ++i) op_counts[i] += other.op_counts[i];
  for (std::size_t i = 0; i < leaf_counts.size(); ++i) leaf_counts[i] += other.leaf_counts[i];
  unary_nodes += other.unary_nodes;
  binary_nodes += other.binary_nodes;
  trees += other.trees;
}

void CorpusStats::merge(const CorpusStats& other) {
  records += other.records;
  attempts += other.attempts;
  for (std::size_t i = 0; i < rejections.size(); ++i) rejections[i] += other.rejections[i];
  draws.merge(other.draws);
}

double CorpusStats::acceptance_rate() const {
  return attempts == 0 ? 0.0 : static_cast<double>(records) / static_cast<double>(attempts);
}

void to_json(nlohmann::json& j, const CorpusStats& s) {
  nlohmann::json rejections = nlohmann::json::object();
  for (std::size_t i = 0; i < s.rejections.size(); ++i) {
    rejections[std::string(reject_reason_name(kAllRejectReasons[i]))] = s.rejections[i];
  }
  nlohmann::json ops = nlohmann::json::object();
  for (std::size_t i = 0; i < s.draws.op_counts.size(); ++i) {
    if (s.draws.op_counts[i] > 0) ops[std::string(op_name(kAllOps[i]))] = s.draws.op_counts[i];
  }
  nlohmann::json leaves = nlohmann::json::object();
  for (std::size_t i = 0; i < kLeafClassCount; ++i) {
    leaves[std::string(leaf_class_name(static_cast<LeafClass>(i)))] = s.draws.leaf_counts[i];
  }
  j = nlohmann::json{{"records", s.records},
                     {"attempts", s.attempts},
                     {"acceptance_rate", s.acceptance_rate()},
                     {"rejections", rejections},
                     {"operators", ops},
                     {"leaves", leaves},
                     {"unary_nodes", s.draws.unary_nodes},
                     {"binary_nodes", s.draws.binary_nodes},
                     {"trees", s.draws.trees}};
}

void from_json(const nlohmann::json& j, CorpusStats& s) {
  s = CorpusStats{};
  s.records = j.at("records").get<std::uint64_t>();
  s.attempts = j.at("attempts").get<std::uint64_t>();
  for (std::size_t i = 0; i < s.rejections.size(); ++i) {
    s.rejections[i] = j.at("rejections").value(std::string(reject_reason_name(kAllRejectReasons[i])), 0ULL);
  }
  for (std::size_t i = 0; i < s.draws.op_counts.size(); ++i) {
    s.draws.op_counts[i] = j.at("operators").value(std::string(op_name(kAllOps[i])), 0ULL);
  }
  for (std::size_t i = 0; i < kLeafClassCount; ++i) {
    s.draws.leaf_counts[i] = j.at("leaves").value(std::string(leaf_class_name(static_cast<LeafClass>(i))), 0ULL);
  }
  s.draws.unary_nodes = j.at("unary_nodes").get<std::uint64_t>();
  s.draws.binary_nodes = j.at("binary_nodes").get<std::uint64_t>();
  s.draws.trees = j.at("trees").get<std::uint64_t>();
}

TreeSampler::TreeSampler(GeneratorConfig config) : config_(std::move(config)) {
  config_.validate();
  for (const auto& w : config_.unary_ops) unary_weights_.push_back(w.weight);
  for (const auto& w : config_.binary_ops) binary_weights_.push_back(w.weight);

  const double p1 = config_.unary_ops.empty() ? 0.0 : config_.unary_weight;
  const double p2 = config_.binary_ops.empty() ? 0.0 : config_.binary_weight;
  const int max_ops = config_.max_operators;
  width_ = max_ops + 1;
  const int max_empty = 2 * max_ops + 3;
  counts_.assign(static_cast<std::size_t>((max_empty + 1) * width_), 0.0);
  auto at = [&](int e, int n) -> double& { return counts_[static_cast<std::size_t>(e * width_ + n)]; };
  // D(0, n) = 0, D(e, 0) = 1, D(e, n) = D(e-1, n) + p1 D(e, n-1) + p2 D(e+1, n-1)
  for (int e = 1; e <= max_empty; ++e) at(e, 0) = 1.0;
  for (int n = 1; n <= max_ops; ++n) {
    for (int e = 1; e + 1 <= max_empty; ++e) {
      at(e, n) = at(e - 1, n) + p1 * at(e, n - 1) + p2 * at(e + 1, n - 1);
    }
  }
}

double TreeSampler::count(int empty, int ops) const {
  return counts_[static_cast<std::size_t>(empty * width_ + ops)];
}

Expression TreeSampler::draw_leaf(Rng& rng, DrawStats* stats) const {
  const double weights[] = {config_.leaves.variable, config_.leaves.integer, config_.leaves.real, config_.leaves.zero};
  const auto cls = static_cast<LeafClass>(weighted_index(rng, weights));
  if (stats) ++stats->leaf_counts[static_cast<std::size_t>(cls)];
  switch (cls) {
    case LeafClass::Variable:
      return Expression::variable(config_.dims == 1 ? 0 : uniform_int(rng, 0, config_.dims - 1));
    case LeafClass::Integer: {
      int v = uniform_int(rng, 1, 10);
      return Expression::integer(v <= 5 ? v : 5 - v);
    }
    case LeafClass::Real:
      return Expression::constant(uniform(rng, -5.0, 5.0));
    case LeafClass::Zero:
      return Expression::integer(0);
  }
  return Expression::integer(0);
}

namespace {

struct Slot {
  bool empty = true;
  Op op = Op::Add;
};

Expression build(const std::vector<Slot>& slots, std::size_t& pos, std::vector<Expression>& leaves,
                 std::size_t& next_leaf) {
  const Slot& s = slots[pos++];
  if (s.empty) return std::move(leaves[next_leaf++]);
  if (arity(s.op) == 1) return Expression::unary(s.op, build(slots, pos, leaves, next_leaf));
  auto lhs = build(slots, pos, leaves, next_leaf);
  auto rhs = build(slots, pos, leaves, next_leaf);
  return Expression::binary(s.op, std::move(lhs), std::move(rhs));
}

}  // namespace

Expression TreeSampler::sample(int n_ops, Rng& rng, DrawStats* stats) const {
  if (n_ops < 1 || n_ops > config_.max_operators) fail(ErrorCode::InvalidArgument, "n_ops out of range");
  const double p1 = config_.unary_ops.empty() ? 0.0 : config_.unary_weight;
  const double p2 = config_.binary_ops.empty() ? 0.0 : config_.binary_weight;

  std::vector<Slot> slots(1);
  int empty = 1;
  int left_leaves = 0;
  std::vector<double> probs;
  for (int ops = n_ops; ops > 0; --ops) {
    // Choose how many empty slots to skip (they become leaves) and the arity.
    probs.assign(static_cast<std::size_t>(2 * empty), 0.0);
    for (int i = 0; i < empty; ++i) {
      probs[static_cast<std::size_t>(i)] = p1 * count(empty - i, ops - 1);
      probs[static_cast<std::size_t>(empty + i)] = p2 * count(empty - i + 1, ops - 1);
    }
    const auto choice = static_cast<int>(weighted_index(rng, probs));
    const int skipped = choice % empty;
    const int op_arity = choice < empty ? 1 : 2;
    Op op;
    if (op_arity == 1) {
      op = config_.unary_ops[weighted_index(rng, unary_weights_)].op;
      if (stats) ++stats->unary_nodes;
    } else {
      op = config_.binary_ops[weighted_index(rng, binary_weights_)].op;
      if (stats) ++stats->binary_nodes;
    }
    if (stats) ++stats->op_counts[static_cast<std::size_t>(op)];

    empty += op_arity - 1 - skipped;
    left_leaves += skipped;
    int seen = 0;
    std::size_t pos = 0;
    for (; pos < slots.size(); ++pos) {
      if (slots[pos].empty && seen++ == left_leaves) break;
    }
    slots[pos] = Slot{false, op};
    slots.insert(slots.begin() + static_cast<std::ptrdiff_t>(pos) + 1, static_cast<std::size_t>(op_arity), Slot{});
  }

  std::vector<Expression> leaves;
  for (const auto& s : slots) {
    if (s.empty) leaves.push_back(draw_leaf(rng, stats));
  }
  if (stats) ++stats->trees;
  std::size_t pos = 0, next_leaf = 0;
  return build(slots, pos, leaves, next_leaf);
}

Expression sample_tree(const GeneratorConfig& config, int n_ops, Rng& rng) {
  return TreeSampler(config).sample(n_ops, rng);
}

Generator::Generator(GeneratorConfig config)
    : sampler_(std::move(config)), vocab_(Vocabulary::standard(sampler_.config().encoding, 2)) {}

std::variant<SampleRecord, Rejected> Generator::attempt(Rng& rng, CorpusStats* stats) const {
  const auto& cfg = config();
  auto reject = [&](RejectReason r) -> std::variant<SampleRecord, Rejected> {
    if (stats) ++stats->rejections[static_cast<std::size_t>(r)];
    return Rejected{r};
  };
  if (stats) ++stats->attempts;
  const int n_ops = uniform_int(rng, cfg.min_operators, cfg.max_operators);
  const auto raw = sampler_.sample(n_ops, rng, stats ? &stats->draws : nullptr);

  Expression expr = Expression::integer(0);
  try {
    expr = normalize(raw);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::FoldError) throw;
    return reject(RejectReason::FoldError);
  }
  if (auto s = accept_structure(expr, cfg.max_tokens); !s) return reject(*s.reason);

  auto sampled = sample_points(expr, cfg.sampling, rng);
  if (auto* r = std::get_if<Rejected>(&sampled)) return reject(r->reason);
  auto& points = std::get<PointSet>(sampled);
  if (auto s = accept(expr, points, cfg.max_tokens, cfg.sampling.max_abs_value); !s) return reject(*s.reason);

  SampleRecord record;
  record.meta.dims = cfg.dims;
  record.meta.n_ops = n_ops;
  try {
    record.tokens = encode_preorder(expr, vocab_, cfg.encoding);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EncodingRange) throw;
    return reject(RejectReason::ConstantOutOfRange);
  }
  record.points = std::move(points);
  if (stats) ++stats->records;
  return record;
}

SampleRecord Generator::generate(std::uint64_t index, std::uint64_t seed, CorpusStats* stats) const {
  Rng rng(seed);
  for (int attempt_no = 1; attempt_no <= config().max_attempts; ++attempt_no) {
    auto outcome = attempt(rng, stats);
    if (auto* record = std::get_if<SampleRecord>(&outcome)) {
      record->meta.index = index;
      record->meta.seed = seed;
      record->meta.attempts = attempt_no;
      return std::move(*record);
    }
  }
  fail(ErrorCode::InvalidArgument,
       "record " + std::to_string(index) + ": no accepted draw within " + std::to_string(config().max_attempts) +
           " attempts");
}

std::variant<SampleRecord, Rejected> generate_record(const GeneratorConfig& config, Rng& rng) {
  return Generator(config).attempt(rng);
}

CorpusStats generate_corpus(const GeneratorConfig& config, std::uint64_t n_records, int n_workers,
                            std::uint64_t base_seed, RecordSink& sink) {
  const Generator generator(config);
  const std::size_t workers = static_cast<std::size_t>(std::max(1, n_workers));
  const std::uint64_t chunk = 512 * workers;

  CorpusStats total;
  std::vector<SampleRecord> records;
  std::vector<CorpusStats> stats;
  for (std::uint64_t begin = 0; begin < n_records; begin += chunk) {
    const std::uint64_t end = std::min(n_records, begin + chunk);
    const auto n = static_cast<std::size_t>(end - begin);
    records.assign(n, SampleRecord{});
    stats.assign(n, CorpusStats{});
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto work = [&] {
      for (;;) {
        const std::size_t k = next.fetch_add(1);
        if (k >= n || failed.load()) return;
        try {
          const std::uint64_t index = begin + k;
          records[k] = generator.generate(index, derive_seed(base_seed, index), &stats[k]);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    };
    if (workers == 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
      for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    for (std::size_t k = 0; k < n; ++k) {
      sink.write(records[k]);
      total.merge(stats[k]);
    }
  }
  return total;
}

}  // namespace symreg
