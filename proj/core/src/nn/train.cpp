#include "symreg/nn/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "symreg/errors.hpp"

namespace symreg::nn {

template <class T>
LossParts batch_loss(Model<T>& model, const Batch& batch, double lambda, double sigma, Rng* rng, bool backward) {
  LossParts parts;
  parts.tokens = batch.token_count();
  parts.constants = batch.constant_count();
  if (parts.tokens == 0) return parts;
  const T ce_weight = T(1) / static_cast<T>(parts.tokens);
  const T mse_weight = parts.constants > 0 ? T(1) / static_cast<T>(parts.constants) : T(0);
  const T lam = static_cast<T>(lambda);
  for (int s = 0; s < batch.size; ++s) {
    Graph<T> g(backward);
    g.set_dropout_rng(rng);
    const Var memory = model.encode(g, batch.sample_features<T>(s));
    const auto in_tokens = batch.sample_input_tokens(s);
    const auto in_consts = batch.sample_input_constants(s);
    std::vector<T> constants(in_consts.begin(), in_consts.end());
    if (rng != nullptr && sigma > 0.0) {
      // Input position i + 1 carries the constant of target position i.
      const auto mask = batch.sample_constant_mask(s);
      for (std::size_t i = 0; i + 1 < constants.size(); ++i) {
        if (mask[i]) constants[i + 1] += static_cast<T>(sigma * standard_normal(*rng));
      }
    }
    const auto out = model.decode(g, memory, in_tokens, constants);
    const auto targets = batch.sample_target_tokens(s);
    const auto tconst = batch.sample_target_constants(s);
    std::vector<T> value_targets(tconst.begin(), tconst.end());
    const Var ce = g.cross_entropy_sum(out.logits, targets);
    const Var se = g.masked_squared_error_sum(out.values, value_targets, batch.sample_constant_mask(s));
    const Var ce_mean = g.weighted_sum(std::span<const Var>(&ce, 1), std::span<const T>(&ce_weight, 1));
    const Var se_mean = g.weighted_sum(std::span<const Var>(&se, 1), std::span<const T>(&mse_weight, 1));
    const Var terms[] = {ce_mean, se_mean};
    const T weights[] = {T(1), lam};
    const Var total = g.weighted_sum(terms, weights);
    parts.ce += static_cast<double>(g.scalar(ce_mean));
    parts.mse += static_cast<double>(g.scalar(se_mean));
    parts.total += static_cast<double>(g.scalar(total));
    if (backward) g.backward(total);
  }
  return parts;
}

template LossParts batch_loss(Model<float>&, const Batch&, double, double, Rng*, bool);
template LossParts batch_loss(Model<double>&, const Batch&, double, double, Rng*, bool);

Adam::Adam(ParamStore<float>& params, AdamConfig config) : params_(params.all()), config_(config) {
  for (auto* p : params_) {
    m_.emplace_back(p->value.size(), 0.0f);
    v_.emplace_back(p->value.size(), 0.0f);
  }
}

double Adam::step(double learning_rate) {
  double norm2 = 0.0;
  for (auto* p : params_) {
    for (float g : p->grad.data) norm2 += static_cast<double>(g) * g;
  }
  const double norm = std::sqrt(norm2);
  const double clip = (config_.clip_norm > 0.0 && norm > config_.clip_norm) ? config_.clip_norm / norm : 1.0;
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  const float b1 = static_cast<float>(config_.beta1);
  const float b2 = static_cast<float>(config_.beta2);
  const float step = static_cast<float>(learning_rate / bc1);
  const float inv_bc2 = static_cast<float>(1.0 / bc2);
  const float eps = static_cast<float>(config_.epsilon);
  const float c = static_cast<float>(clip);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = *params_[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const float g = p.grad.data[k] * c;
      m[k] = b1 * m[k] + (1.0f - b1) * g;
      v[k] = b2 * v[k] + (1.0f - b2) * g * g;
      p.value.data[k] -= step * m[k] / (std::sqrt(v[k] * inv_bc2) + eps);
    }
  }
  return norm;
}

std::vector<NamedTensor> Adam::export_moments(bool second) const {
  std::vector<NamedTensor> out;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    out.push_back({params_[i]->name, params_[i]->value.rows, params_[i]->value.cols, second ? v_[i] : m_[i]});
  }
  return out;
}

void Adam::import_moments(const std::vector<NamedTensor>& m, const std::vector<NamedTensor>& v, std::uint64_t steps) {
  if (m.size() != params_.size() || v.size() != params_.size()) fail(ErrorCode::Checkpoint, "optimizer state mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (m[i].data.size() != m_[i].size() || v[i].data.size() != v_[i].size() || m[i].name != params_[i]->name) {
      fail(ErrorCode::Checkpoint, "optimizer state mismatch at " + params_[i]->name);
    }
    m_[i] = m[i].data;
    v_[i] = v[i].data;
  }
  t_ = steps;
}

void to_json(nlohmann::json& j, const LogEntry& e) {
  j = nlohmann::json{{"step", e.step},   {"epoch", e.epoch}, {"ce", e.ce},
                     {"mse", e.mse},     {"total", e.total}, {"lambda", e.lambda},
                     {"sigma", e.sigma}, {"lr", e.learning_rate}, {"grad_norm", e.grad_norm},
                     {"seconds", e.seconds}};
}

void to_json(nlohmann::json& j, const TrainingReport& r) {
  j = nlohmann::json{{"steps", r.steps},       {"total_steps", r.total_steps}, {"resumed_from", r.resumed_from},
                     {"first_ce", r.first_ce}, {"final_ce", r.final_ce},       {"final_mse", r.final_mse},
                     {"seconds", r.seconds},   {"log", r.log}};
}

namespace {

ScheduleConfig make_schedule(const TrainOptions& o, std::int64_t steps_per_epoch, std::int64_t total, int dim) {
  ScheduleConfig c;
  c.total_steps = total;
  c.lambda_delay = std::min<std::int64_t>(total - 1, static_cast<std::int64_t>(o.lambda_delay_fraction * total));
  c.sigma0 = o.sigma0;
  c.warmup_steps = std::max<std::int64_t>(1, o.warmup_steps);
  c.model_dim = dim;
  c.lr_divisor = o.lr_divisor;
  c.block = TrainSchedule::block_for(steps_per_epoch);
  return c;
}

std::int64_t compute_total(const TrainOptions& o, std::int64_t steps_per_epoch) {
  std::int64_t total = steps_per_epoch * o.epochs;
  if (o.max_steps > 0) total = std::min(total, o.max_steps);
  return std::max<std::int64_t>(total, 1);
}

std::int64_t checked_steps_per_epoch(std::size_t n, int batch) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "no training examples");
  if (batch <= 0) fail(ErrorCode::InvalidArgument, "batch size must be positive");
  return static_cast<std::int64_t>((n + static_cast<std::size_t>(batch) - 1) / static_cast<std::size_t>(batch));
}

constexpr std::uint64_t kOrderStream = 0x6f72646572ull;
constexpr std::uint64_t kStepStream = 0x73746570ull;

}  // namespace

Trainer::Trainer(Model<float>& model, const std::vector<TrainingExample>& data, const Vocabulary& vocab,
                 TrainOptions options)
    : model_(model),
      data_(data),
      vocab_(vocab),
      options_(std::move(options)),
      steps_per_epoch_(checked_steps_per_epoch(data.size(), options_.batch_size)),
      total_steps_(compute_total(options_, steps_per_epoch_)),
      schedule_(make_schedule(options_, steps_per_epoch_, total_steps_, model.config().decoder.dim)),
      adam_(model.params(), options_.adam),
      rng_(options_.seed) {
  if (options_.epochs < 1) fail(ErrorCode::InvalidArgument, "epochs must be positive");
  if (static_cast<int>(vocab.size()) != model.config().vocab_size) {
    fail(ErrorCode::InvalidArgument, "vocabulary size does not match the model");
  }
}

std::vector<std::size_t> Trainer::epoch_order(std::int64_t epoch) const {
  std::vector<std::size_t> order(data_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(options_.seed ^ kOrderStream, static_cast<std::uint64_t>(epoch)));
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(i - 1)));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

Batch Trainer::batch_for_step(std::int64_t step) const {
  const std::int64_t epoch = step / steps_per_epoch_;
  const std::int64_t index = step % steps_per_epoch_;
  const auto order = epoch_order(epoch);
  const std::size_t begin = static_cast<std::size_t>(index) * static_cast<std::size_t>(options_.batch_size);
  const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(options_.batch_size));
  std::vector<const TrainingExample*> members;
  for (std::size_t i = begin; i < end; ++i) members.push_back(&data_[order[i]]);
  return make_batch(members, vocab_, model_.config().n_variables);
}

LossParts Trainer::train_step(double* grad_norm) {
  const Batch batch = batch_for_step(step_);
  rng_.seed(derive_seed(options_.seed ^ kStepStream, static_cast<std::uint64_t>(step_)));
  model_.params().zero_grad();
  const LossParts parts = batch_loss(model_, batch, schedule_.lambda(step_), schedule_.sigma(step_), &rng_, true);
  if (!std::isfinite(parts.ce) || !std::isfinite(parts.total)) {
    fail(ErrorCode::Divergence, "loss became non-finite at step " + std::to_string(step_));
  }
  const double norm = adam_.step(schedule_.learning_rate(step_));
  if (grad_norm) *grad_norm = norm;
  ++step_;
  return parts;
}

nlohmann::json Trainer::train_state() const {
  return nlohmann::json{{"seed", options_.seed},
                        {"batch_size", options_.batch_size},
                        {"total_steps", total_steps_},
                        {"steps_per_epoch", steps_per_epoch_},
                        {"examples", data_.size()}};
}

void Trainer::save(const std::filesystem::path& path) const {
  Checkpoint c;
  c.config = model_.config();
  c.vocab_hash = format_hash(vocab_.hash());
  c.parameters = export_parameters(model_);
  c.adam_m = adam_.export_moments(false);
  c.adam_v = adam_.export_moments(true);
  c.step = static_cast<std::uint64_t>(step_);
  c.rng_state = save_rng(rng_);
  c.train_state = train_state();
  write_checkpoint(path, c);
}

void Trainer::restore(const std::filesystem::path& path) {
  const Checkpoint c = read_checkpoint(path);
  if (c.vocab_hash != format_hash(vocab_.hash())) fail(ErrorCode::Checkpoint, "checkpoint vocabulary mismatch");
  if (nlohmann::json(c.config) != nlohmann::json(model_.config())) {
    fail(ErrorCode::Checkpoint, "checkpoint model config differs from the requested one");
  }
  if (c.train_state != train_state()) fail(ErrorCode::Checkpoint, "checkpoint was written by a different training setup");
  import_parameters(model_, c.parameters);
  adam_.import_moments(c.adam_m, c.adam_v, c.step);
  step_ = static_cast<std::int64_t>(c.step);
  rng_ = load_rng(c.rng_state);
}

TrainingReport Trainer::run() {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  TrainingReport report;
  report.total_steps = total_steps_;
  std::filesystem::path ckpt, log_path;
  std::ofstream log;
  if (!options_.out_dir.empty()) {
    std::filesystem::create_directories(options_.out_dir);
    ckpt = options_.out_dir / "checkpoint.bin";
    log_path = options_.out_dir / "train_log.jsonl";
    if (options_.resume && std::filesystem::exists(ckpt)) {
      restore(ckpt);
      report.resumed_from = step_;
    }
    log.open(log_path, std::ios::app);
    if (!log) fail(ErrorCode::Io, "cannot open training log: " + log_path.string());
  }
  double sum_ce = 0, sum_mse = 0, sum_total = 0, sum_norm = 0;
  int count = 0;
  bool first = true;
  while (step_ < total_steps_) {
    const std::int64_t s = step_;
    double norm = 0;
    const LossParts parts = train_step(&norm);
    if (first) {
      report.first_ce = parts.ce;
      first = false;
    }
    report.final_ce = parts.ce;
    report.final_mse = parts.mse;
    sum_ce += parts.ce;
    sum_mse += parts.mse;
    sum_total += parts.total;
    sum_norm += norm;
    ++count;
    const bool last = step_ == total_steps_;
    if (count == options_.log_interval || last) {
      LogEntry e{s + 1,
                 s / steps_per_epoch_,
                 sum_ce / count,
                 sum_mse / count,
                 sum_total / count,
                 schedule_.lambda(s),
                 schedule_.sigma(s),
                 schedule_.learning_rate(s),
                 sum_norm / count,
                 std::chrono::duration<double>(Clock::now() - t0).count()};
      report.log.push_back(e);
      if (log) {
        log << nlohmann::json(e).dump() << '\n';
        log.flush();
      }
      sum_ce = sum_mse = sum_total = sum_norm = 0;
      count = 0;
    }
    if (!ckpt.empty() && (last || (options_.checkpoint_interval > 0 && step_ % options_.checkpoint_interval == 0))) {
      save(ckpt);
    }
  }
  report.steps = step_;
  report.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return report;
}

}  // namespace symreg::nn
