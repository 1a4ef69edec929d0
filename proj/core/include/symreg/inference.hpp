#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "symreg/const_opt.hpp"
#include "symreg/encoding.hpp"
#include "symreg/metrics.hpp"
#include "symreg/nn/model.hpp"
#include "symreg/random.hpp"
#include "symreg/sampling.hpp"

namespace symreg {

struct InferenceOptions {
  int top_k = 20;
  int n_samples = 256;
  double temperature = 1.0;
  /// Longest symbol sequence (end token excluded); 0 uses the model limit.
  int max_length = 0;
  RefineOptions refine;
  bool refine_enabled = true;
  bool arity_mask = true;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate(std::size_t vocab_size) const;
};

struct Candidate {
  std::size_t sample_index = 0;
  TokenSequence tokens;
  std::optional<Expression> expr;
  /// Decode failure reason when `expr` is empty.
  std::string error;
  double mse_before = 0.0;
  std::optional<Expression> refined;
  double mse_after = 0.0;
  int refine_iterations = 0;
  double seconds = 0.0;
};

struct InferenceReport {
  std::size_t rollouts = 0;
  /// Unique candidates in sample-index order.
  std::vector<Candidate> candidates;
  std::optional<std::size_t> best;
  double sampling_seconds = 0.0;
  double refine_seconds = 0.0;
};

/// Serialized report; with `include_timing` false the document only depends
/// on the inputs.
nlohmann::json report_to_json(const InferenceReport& report, const Vocabulary& vocab, bool include_timing = true);

/// Top-K rollouts. Rollout i draws from a stream seeded by (seed, i), so the
/// first n rollouts are the same for every n_samples >= n.
std::vector<TokenSequence> sample_candidates(const nn::Model<float>& model, const Vocabulary& vocab,
                                             const PointSet& points, const InferenceOptions& opts);

struct Prediction {
  Expression expr;
  double mse = 0.0;
  InferenceReport report;
};

/// Sample, decode, refine every unique candidate and keep the lowest
/// post-refinement mse (ties: fewer tokens, then earlier sample). `extra`
/// sequences are appended after the rollouts. Throws AllCandidatesFailed when
/// no candidate has a finite mse.
Prediction predict(const nn::Model<float>& model, const Vocabulary& vocab, const PointSet& points,
                   const InferenceOptions& opts, std::span<const TokenSequence> extra = {});

/// Same selection over a fixed candidate list.
Prediction select_candidates(std::span<const TokenSequence> sequences, const Vocabulary& vocab, const PointSet& points,
                             const InferenceOptions& opts);

struct OodResult {
  Metric relative_error;
  Metric r_squared;
  std::size_t finite = 0;
  std::size_t total = 0;
  /// False when fewer than half of the points give finite values for both
  /// expressions (FewerThanHalfFinite).
  bool valid = false;
};

/// Compares two expressions on points with 5 < |x_i| < 5 + d for every
/// coordinate, signs drawn uniformly.
OodResult evaluate_ood(const Expression& predicted, const Expression& truth, double d, int n_points, int dims,
                       Rng& rng);

}  // namespace symreg
