#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "symreg/datagen.hpp"
#include "symreg/nn/tensor.hpp"
#include "symreg/vocabulary.hpp"

namespace symreg::nn {

/// One training pair in model form.
struct TrainingExample {
  /// Preorder symbols without start/end.
  std::vector<int> symbols;
  /// Regression targets aligned with `symbols`: mantissa (Extended) or raw
  /// value (Base) at constant tokens, 0 elsewhere.
  std::vector<double> values;
  Eigen::MatrixXd inputs;
  Eigen::VectorXd outputs;
};

TrainingExample to_training_example(const SampleRecord& record, const Vocabulary& vocab);

/// Reads a corpus and checks its vocabulary against `vocab`.
std::vector<TrainingExample> load_training_examples(const std::filesystem::path& corpus, const Vocabulary& vocab);

/// Padded batch. Decoder inputs are <start> followed by the symbols, targets
/// are the symbols followed by <end>; position i of the input predicts target i.
struct Batch {
  int size = 0;
  int max_points = 0;
  int max_length = 0;
  int input_dim = 0;

  /// (size * max_points) x input_dim, sample-major.
  Mat<float> features;
  std::vector<std::uint8_t> point_mask;
  std::vector<int> point_counts;
  std::vector<int> dims;

  /// size * max_length each.
  std::vector<int> input_tokens;
  std::vector<float> input_constants;
  std::vector<int> target_tokens;
  std::vector<float> target_constants;
  std::vector<std::uint8_t> token_mask;
  std::vector<std::uint8_t> constant_mask;
  std::vector<int> lengths;

  /// Valid rows of sample b.
  template <class T>
  Mat<T> sample_features(int b) const;
  std::span<const int> sample_input_tokens(int b) const;
  std::span<const int> sample_target_tokens(int b) const;
  std::span<const float> sample_input_constants(int b) const;
  std::span<const float> sample_target_constants(int b) const;
  std::span<const std::uint8_t> sample_constant_mask(int b) const;

  std::size_t token_count() const;
  std::size_t constant_count() const;
};

/// Throws InvalidArgument for non-finite points.
Batch make_batch(std::span<const TrainingExample* const> examples, const Vocabulary& vocab, int n_variables);

extern template Mat<float> Batch::sample_features<float>(int) const;
extern template Mat<double> Batch::sample_features<double>(int) const;

}  // namespace symreg::nn
