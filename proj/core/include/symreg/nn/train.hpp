#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json_fwd.hpp>
#include <vector>

#include "symreg/nn/batch.hpp"
#include "symreg/nn/checkpoint.hpp"
#include "symreg/nn/model.hpp"
#include "symreg/nn/schedule.hpp"

namespace symreg::nn {

struct LossParts {
  double total = 0.0;
  /// Mean cross-entropy per target token.
  double ce = 0.0;
  /// Mean squared error per constant position; 0 when there are none.
  double mse = 0.0;
  std::size_t tokens = 0;
  std::size_t constants = 0;
};

/// total = ce + lambda * mse. Decoder input constants are perturbed by
/// N(0, sigma^2) noise drawn from `rng`, which also drives dropout; pass null
/// for a deterministic evaluation pass. With `backward` the gradients of
/// `total` are accumulated into the parameters.
template <class T>
LossParts batch_loss(Model<T>& model, const Batch& batch, double lambda, double sigma, Rng* rng, bool backward);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-9;
  /// Global gradient norm cap; 0 disables clipping.
  double clip_norm = 1.0;
};

class Adam {
 public:
  Adam(ParamStore<float>& params, AdamConfig config);
  /// Applies one update from the accumulated gradients; returns the
  /// pre-clipping gradient norm.
  double step(double learning_rate);
  std::uint64_t steps() const noexcept { return t_; }

  std::vector<NamedTensor> export_moments(bool second) const;
  void import_moments(const std::vector<NamedTensor>& m, const std::vector<NamedTensor>& v, std::uint64_t steps);

 private:
  std::vector<Parameter<float>*> params_;
  AdamConfig config_;
  std::vector<std::vector<float>> m_, v_;
  std::uint64_t t_ = 0;
};

struct TrainOptions {
  int epochs = 1;
  int batch_size = 32;
  /// Stop after this many optimizer steps when positive.
  std::int64_t max_steps = 0;
  std::int64_t warmup_steps = 1000;
  /// Fraction of the run during which the regression weight stays at 0.
  double lambda_delay_fraction = 0.25;
  double sigma0 = 0.1;
  double lr_divisor = 5.0;
  AdamConfig adam;
  int log_interval = 50;
  std::int64_t checkpoint_interval = 1000;
  std::uint64_t seed = 0;
  /// Receives train_log.jsonl and checkpoint.bin; nothing is written when empty.
  std::filesystem::path out_dir;
  /// Continue from out_dir/checkpoint.bin when it exists.
  bool resume = true;
};

struct LogEntry {
  std::int64_t step = 0;
  std::int64_t epoch = 0;
  double ce = 0.0;
  double mse = 0.0;
  double total = 0.0;
  double lambda = 0.0;
  double sigma = 0.0;
  double learning_rate = 0.0;
  double grad_norm = 0.0;
  double seconds = 0.0;
};

void to_json(nlohmann::json& j, const LogEntry& e);

struct TrainingReport {
  std::int64_t steps = 0;
  std::int64_t total_steps = 0;
  std::int64_t resumed_from = -1;
  double first_ce = 0.0;
  double final_ce = 0.0;
  double final_mse = 0.0;
  double seconds = 0.0;
  std::vector<LogEntry> log;
};

void to_json(nlohmann::json& j, const TrainingReport& r);

/// Single-threaded teacher-forced training. Batch order for epoch e is a
/// permutation seeded from (seed, e) and step s draws its noise from a stream
/// seeded from (seed, s), so a resumed run repeats an uninterrupted one.
class Trainer {
 public:
  Trainer(Model<float>& model, const std::vector<TrainingExample>& data, const Vocabulary& vocab, TrainOptions options);

  std::int64_t steps_per_epoch() const noexcept { return steps_per_epoch_; }
  std::int64_t total_steps() const noexcept { return total_steps_; }
  std::int64_t step() const noexcept { return step_; }
  const TrainSchedule& schedule() const noexcept { return schedule_; }

  /// Example order of one epoch.
  std::vector<std::size_t> epoch_order(std::int64_t epoch) const;
  Batch batch_for_step(std::int64_t step) const;

  /// One optimizer step. Throws Divergence when the loss is not finite.
  LossParts train_step(double* grad_norm = nullptr);
  TrainingReport run();

  void save(const std::filesystem::path& path) const;
  void restore(const std::filesystem::path& path);

 private:
  nlohmann::json train_state() const;

  Model<float>& model_;
  const std::vector<TrainingExample>& data_;
  const Vocabulary& vocab_;
  TrainOptions options_;
  std::int64_t steps_per_epoch_ = 0;
  std::int64_t total_steps_ = 0;
  TrainSchedule schedule_;
  Adam adam_;
  std::int64_t step_ = 0;
  Rng rng_;
};

extern template LossParts batch_loss(Model<float>&, const Batch&, double, double, Rng*, bool);
extern template LossParts batch_loss(Model<double>&, const Batch&, double, double, Rng*, bool);

}  // namespace symreg::nn
