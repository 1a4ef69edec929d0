#include "symreg/inference.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <thread>

#include "symreg/errors.hpp"
#include "symreg/eval.hpp"

namespace symreg {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kInf = std::numeric_limits<double>::infinity();

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        if (failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

TokenSequence rollout(const nn::Model<float>& model, const Vocabulary& vocab, const nn::Mat<float>& memory, int dims,
                      int max_symbols, const InferenceOptions& opts, Rng& rng) {
  TokenSequence seq;
  std::vector<int> tokens{vocab.start()};
  std::vector<float> consts{0.0f};
  int open = 1;
  const auto v = static_cast<int>(vocab.size());
  std::vector<double> weights;
  std::vector<int> ids;
  for (;;) {
    if (static_cast<int>(seq.size()) >= max_symbols + 1) break;
    const auto step = model.decode_step(memory, tokens, consts);
    ids.clear();
    weights.clear();
    const int n = static_cast<int>(seq.size());
    for (int t = 0; t < v; ++t) {
      if (t == vocab.pad() || t == vocab.start()) continue;
      if (t == vocab.end()) {
        if (opts.arity_mask && open != 0) continue;
        ids.push_back(t);
        continue;
      }
      const int a = vocab.arity(t);
      if (a < 0) continue;
      if (opts.arity_mask) {
        if (open == 0) continue;
        const int after = open - 1 + a;
        if (n + 1 + after > max_symbols) continue;
        const auto& info = vocab.info(t);
        if (info.cls == TokenClass::Variable && info.value >= dims) continue;
      }
      ids.push_back(t);
    }
    if (!opts.arity_mask && n >= max_symbols) {
      ids.assign(1, vocab.end());
    }
    if (ids.empty()) break;
    // Top-K among the allowed tokens: highest probability first, ties by id.
    std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
      return step.probabilities[static_cast<std::size_t>(a)] > step.probabilities[static_cast<std::size_t>(b)];
    });
    if (static_cast<int>(ids.size()) > opts.top_k) ids.resize(static_cast<std::size_t>(opts.top_k));
    for (int t : ids) {
      const double p = step.probabilities[static_cast<std::size_t>(t)];
      weights.push_back(opts.temperature == 1.0 ? p : std::pow(p, 1.0 / opts.temperature));
    }
    double total = 0.0;
    for (double w : weights) total += w;
    const int chosen = total > 0.0 ? ids[weighted_index(rng, weights)] : ids.front();
    if (chosen == vocab.end()) {
      seq.symbols.push_back(chosen);
      seq.constants.push_back(0.0);
      break;
    }
    double value = 0.0;
    if (vocab.is_constant_token(chosen)) {
      value = step.value;
      if (vocab.mode() == EncodingMode::Extended) value = std::clamp(value, -1.0, 1.0);
    }
    seq.symbols.push_back(chosen);
    seq.constants.push_back(value);
    tokens.push_back(chosen);
    consts.push_back(static_cast<float>(value));
    open += vocab.arity(chosen) - 1;
    if (static_cast<int>(tokens.size()) >= model.config().decoder.max_length && open != 0) break;
  }
  return seq;
}

/// Strips the end token; reports whether the rollout terminated.
bool strip_end(TokenSequence& seq, const Vocabulary& vocab) {
  if (!seq.symbols.empty() && seq.symbols.back() == vocab.end()) {
    seq.symbols.pop_back();
    seq.constants.pop_back();
    return true;
  }
  return false;
}

}  // namespace

void InferenceOptions::validate(std::size_t vocab_size) const {
  if (top_k < 1 || static_cast<std::size_t>(top_k) > vocab_size) fail(ErrorCode::InvalidArgument, "top_k out of range");
  if (n_samples < 1) fail(ErrorCode::InvalidArgument, "n_samples must be positive");
  if (!(temperature > 0.0)) fail(ErrorCode::InvalidArgument, "temperature must be positive");
  if (max_length < 0) fail(ErrorCode::InvalidArgument, "max_length must be non-negative");
  refine.validate();
}

std::vector<TokenSequence> sample_candidates(const nn::Model<float>& model, const Vocabulary& vocab,
                                             const PointSet& points, const InferenceOptions& opts) {
  opts.validate(vocab.size());
  if (static_cast<int>(vocab.size()) != model.config().vocab_size) {
    fail(ErrorCode::InvalidArgument, "vocabulary does not match the model");
  }
  const nn::Mat<float> memory = model.encode_points(points.inputs, points.outputs);
  const int model_limit = model.config().decoder.max_length - 1;
  const int max_symbols = opts.max_length > 0 ? std::min(opts.max_length, model_limit) : model_limit;
  std::vector<TokenSequence> out(static_cast<std::size_t>(opts.n_samples));
  parallel_for(out.size(), opts.threads, [&](std::size_t i) {
    Rng rng(derive_seed(opts.seed, i));
    out[i] = rollout(model, vocab, memory, points.dims(), max_symbols, opts, rng);
  });
  return out;
}

Prediction select_candidates(std::span<const TokenSequence> sequences, const Vocabulary& vocab, const PointSet& points,
                             const InferenceOptions& opts) {
  InferenceReport report;
  report.rollouts = sequences.size();
  std::map<std::vector<TokenId>, std::size_t> seen;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    TokenSequence seq = sequences[i];
    const bool terminated = strip_end(seq, vocab);
    if (!seen.emplace(seq.symbols, i).second) continue;
    Candidate c;
    c.sample_index = i;
    c.tokens = seq;
    c.mse_before = c.mse_after = kInf;
    if (!terminated && !is_valid_preorder(seq.symbols, vocab)) {
      c.error = "unterminated rollout";
    } else {
      try {
        c.expr = decode_preorder(seq, vocab, vocab.mode());
        if (max_variable_index(*c.expr) >= points.dims()) {
          c.expr.reset();
          c.error = "uses a variable the data does not have";
        }
      } catch (const Error& e) {
        c.error = e.what();
      }
    }
    report.candidates.push_back(std::move(c));
  }

  const auto t0 = Clock::now();
  parallel_for(report.candidates.size(), opts.threads, [&](std::size_t k) {
    Candidate& c = report.candidates[k];
    if (!c.expr) return;
    const auto t = Clock::now();
    if (opts.refine_enabled) {
      const RefineResult r = refine(*c.expr, points, opts.refine);
      c.mse_before = r.initial_mse;
      c.refined = r.expr;
      c.mse_after = r.mse;
      c.refine_iterations = r.iterations;
    } else {
      c.mse_before = c.mse_after = mse(*c.expr, points);
      c.refined = c.expr;
    }
    c.seconds = seconds_since(t);
  });
  report.refine_seconds = seconds_since(t0);

  for (std::size_t k = 0; k < report.candidates.size(); ++k) {
    const Candidate& c = report.candidates[k];
    if (!c.refined || !std::isfinite(c.mse_after)) continue;
    if (!report.best) {
      report.best = k;
      continue;
    }
    const Candidate& b = report.candidates[*report.best];
    if (c.mse_after < b.mse_after || (c.mse_after == b.mse_after && c.tokens.size() < b.tokens.size())) {
      report.best = k;
    }
  }
  if (!report.best) fail(ErrorCode::AllCandidatesFailed, "no candidate produced a finite error");
  const Candidate& best = report.candidates[*report.best];
  return Prediction{*best.refined, best.mse_after, std::move(report)};
}

Prediction predict(const nn::Model<float>& model, const Vocabulary& vocab, const PointSet& points,
                   const InferenceOptions& opts, std::span<const TokenSequence> extra) {
  const auto t0 = Clock::now();
  std::vector<TokenSequence> seqs = sample_candidates(model, vocab, points, opts);
  const double sampling = seconds_since(t0);
  seqs.insert(seqs.end(), extra.begin(), extra.end());
  Prediction p = select_candidates(seqs, vocab, points, opts);
  p.report.sampling_seconds = sampling;
  return p;
}

nlohmann::json report_to_json(const InferenceReport& report, const Vocabulary& vocab, bool include_timing) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : report.candidates) {
    nlohmann::json j{{"sample_index", c.sample_index},
                     {"symbols", token_strings(c.tokens, vocab)},
                     {"constants", c.tokens.constants},
                     {"mse_before", num(c.mse_before)},
                     {"mse_after", num(c.mse_after)},
                     {"refine_iterations", c.refine_iterations}};
    if (c.expr) j["infix"] = to_infix(*c.expr);
    if (c.refined) j["refined_infix"] = to_infix(*c.refined);
    if (!c.error.empty()) j["error"] = c.error;
    if (include_timing) j["seconds"] = c.seconds;
    cands.push_back(std::move(j));
  }
  nlohmann::json out{{"rollouts", report.rollouts}, {"unique", report.candidates.size()}, {"candidates", cands}};
  if (report.best) {
    const auto& b = report.candidates[*report.best];
    out["best"] = {{"index", *report.best},
                   {"sample_index", b.sample_index},
                   {"symbols", token_strings(encode_preorder(*b.refined, vocab, vocab.mode()), vocab)},
                   {"infix", to_infix(*b.refined)},
                   {"mse", num(b.mse_after)}};
  }
  if (include_timing) {
    out["sampling_seconds"] = report.sampling_seconds;
    out["refine_seconds"] = report.refine_seconds;
  }
  return out;
}

OodResult evaluate_ood(const Expression& predicted, const Expression& truth, double d, int n_points, int dims,
                       Rng& rng) {
  if (!(d > 0.0)) fail(ErrorCode::InvalidArgument, "ood distance must be positive");
  if (n_points < 1 || dims < 1) fail(ErrorCode::InvalidArgument, "ood needs points and dimensions");
  Eigen::MatrixXd x(n_points, dims);
  for (int i = 0; i < n_points; ++i) {
    for (int k = 0; k < dims; ++k) {
      // (5, 5 + d]: 5 + d - u * d with u in [0, 1).
      const double mag = 5.0 + d - uniform01(rng) * d;
      x(i, k) = uniform01(rng) < 0.5 ? -mag : mag;
    }
  }
  const Eigen::VectorXd yp = evaluate(predicted, x);
  const Eigen::VectorXd yt = evaluate(truth, x);
  OodResult r;
  r.total = static_cast<std::size_t>(n_points);
  for (int i = 0; i < n_points; ++i) {
    if (std::isfinite(yp[i]) && std::isfinite(yt[i])) ++r.finite;
  }
  r.valid = 2 * r.finite >= r.total && r.finite > 0;
  if (r.valid) {
    r.relative_error = relative_error(yt, yp);
    r.r_squared = r_squared(yt, yp);
  }
  return r;
}

}  // namespace symreg
