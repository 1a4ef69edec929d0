#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <nlohmann/json_fwd.hpp>
#include <variant>
#include <vector>

#include "symreg/encoding.hpp"
#include "symreg/expr.hpp"
#include "symreg/random.hpp"
#include "symreg/sampling.hpp"
#include "symreg/vocabulary.hpp"

namespace symreg {

struct WeightedOp {
  Op op;
  double weight;
};

enum class LeafClass : std::uint8_t { Variable, Integer, Real, Zero };
inline constexpr std::size_t kLeafClassCount = 4;
std::string_view leaf_class_name(LeafClass c);

struct LeafWeights {
  double variable = 20.0;
  double integer = 10.0;  // nonzero integers in [-5, 5]
  double real = 10.0;     // uniform floats in [-5, 5]
  double zero = 1.0;
};

struct GeneratorConfig {
  int max_operators = 10;
  int min_operators = 1;
  int dims = 1;
  std::vector<WeightedOp> unary_ops;
  std::vector<WeightedOp> binary_ops;
  LeafWeights leaves;
  /// Relative weight of unary vs binary nodes in the tree-count recursion.
  double unary_weight = 1.0;
  double binary_weight = 1.0;
  std::size_t max_tokens = kMaxTokens;
  /// Draws per record before generation gives up.
  int max_attempts = 10000;
  SamplingPolicy sampling;
  EncodingMode encoding = EncodingMode::Extended;

  /// The published operator and leaf tables.
  static GeneratorConfig defaults(int dims = 1);
  void validate() const;
};

void to_json(nlohmann::json& j, const GeneratorConfig& c);
void from_json(const nlohmann::json& j, GeneratorConfig& c);

/// Counts gathered from raw tree draws, before any rejection.
struct DrawStats {
  std::array<std::uint64_t, std::size(kAllOps)> op_counts{};
  std::array<std::uint64_t, kLeafClassCount> leaf_counts{};
  std::uint64_t unary_nodes = 0;
  std::uint64_t binary_nodes = 0;
  std::uint64_t trees = 0;

  void merge(const DrawStats& other);
};

/// Uniform unary-binary tree sampler over trees with a fixed operator count,
/// following the empty-node counting recursion of Lample & Charton.
class TreeSampler {
 public:
  explicit TreeSampler(GeneratorConfig config);

  const GeneratorConfig& config() const noexcept { return config_; }
  Expression sample(int n_ops, Rng& rng, DrawStats* stats = nullptr) const;

 private:
  double count(int empty, int ops) const;
  Expression draw_leaf(Rng& rng, DrawStats* stats) const;

  GeneratorConfig config_;
  std::vector<double> unary_weights_;
  std::vector<double> binary_weights_;
  /// counts_[e * width_ + n]: number of trees with `n` operators hanging off `e` empty slots.
  std::vector<double> counts_;
  int width_ = 0;
};

Expression sample_tree(const GeneratorConfig& config, int n_ops, Rng& rng);

struct RecordMetadata {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  int dims = 1;
  int n_ops = 0;
  int attempts = 0;
};

struct SampleRecord {
  RecordMetadata meta;
  TokenSequence tokens;
  PointSet points;
};

struct CorpusStats {
  std::uint64_t records = 0;
  std::uint64_t attempts = 0;
  std::array<std::uint64_t, std::size(kAllRejectReasons)> rejections{};
  DrawStats draws;

  void merge(const CorpusStats& other);
  double acceptance_rate() const;
};

void to_json(nlohmann::json& j, const CorpusStats& s);
void from_json(const nlohmann::json& j, CorpusStats& s);

class Generator {
 public:
  explicit Generator(GeneratorConfig config);

  const GeneratorConfig& config() const noexcept { return sampler_.config(); }
  const Vocabulary& vocabulary() const noexcept { return vocab_; }

  /// One pass of draw -> normalize -> filter -> sample points -> encode.
  std::variant<SampleRecord, Rejected> attempt(Rng& rng, CorpusStats* stats = nullptr) const;
  /// Retries `attempt` on the stream seeded by `seed` until a record is accepted.
  SampleRecord generate(std::uint64_t index, std::uint64_t seed, CorpusStats* stats = nullptr) const;

 private:
  TreeSampler sampler_;
  Vocabulary vocab_;
};

std::variant<SampleRecord, Rejected> generate_record(const GeneratorConfig& config, Rng& rng);

/// Receives accepted records in index order.
class RecordSink {
 public:
  virtual ~RecordSink() = default;
  virtual void write(const SampleRecord& record) = 0;
};

/// Record i is generated from derive_seed(base_seed, i), so the output does not
/// depend on `n_workers`. Records reach the sink in index order.
CorpusStats generate_corpus(const GeneratorConfig& config, std::uint64_t n_records, int n_workers,
                            std::uint64_t base_seed, RecordSink& sink);

}  // namespace symreg
