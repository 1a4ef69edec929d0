#include "symreg/nn/batch.hpp"

#include <algorithm>
#include <cmath>

#include "symreg/corpus.hpp"
#include "symreg/errors.hpp"
#include "symreg/nn/model.hpp"

namespace symreg::nn {

TrainingExample to_training_example(const SampleRecord& record, const Vocabulary& vocab) {
  TrainingExample ex;
  ex.symbols.assign(record.tokens.symbols.begin(), record.tokens.symbols.end());
  ex.values.resize(ex.symbols.size(), 0.0);
  for (std::size_t i = 0; i < ex.symbols.size(); ++i) {
    if (vocab.is_constant_token(ex.symbols[i])) ex.values[i] = record.tokens.constants[i];
  }
  ex.inputs = record.points.inputs;
  ex.outputs = record.points.outputs;
  return ex;
}

std::vector<TrainingExample> load_training_examples(const std::filesystem::path& corpus, const Vocabulary& vocab) {
  CorpusReader reader(corpus);
  if (!(reader.vocabulary() == vocab)) {
    fail(ErrorCode::CorpusFormat, "corpus vocabulary " + reader.header().vocab_hash + " does not match model vocabulary " +
                                      format_hash(vocab.hash()));
  }
  std::vector<TrainingExample> out;
  out.reserve(reader.header().count);
  while (auto r = reader.next()) out.push_back(to_training_example(*r, vocab));
  if (!reader.footer().complete) fail(ErrorCode::CorpusFormat, "corpus is partial: " + reader.footer().error);
  return out;
}

Batch make_batch(std::span<const TrainingExample* const> examples, const Vocabulary& vocab, int n_variables) {
  Batch b;
  b.size = static_cast<int>(examples.size());
  b.input_dim = n_variables + 1;
  for (const auto* ex : examples) {
    b.max_points = std::max(b.max_points, static_cast<int>(ex->outputs.size()));
    b.max_length = std::max(b.max_length, static_cast<int>(ex->symbols.size()) + 1);
  }
  b.features = Mat<float>(b.size * b.max_points, b.input_dim);
  b.point_mask.assign(static_cast<std::size_t>(b.size * b.max_points), 0);
  const std::size_t cells = static_cast<std::size_t>(b.size) * static_cast<std::size_t>(b.max_length);
  b.input_tokens.assign(cells, vocab.pad());
  b.target_tokens.assign(cells, vocab.pad());
  b.input_constants.assign(cells, 0.0f);
  b.target_constants.assign(cells, 0.0f);
  b.token_mask.assign(cells, 0);
  b.constant_mask.assign(cells, 0);
  for (int s = 0; s < b.size; ++s) {
    const TrainingExample& ex = *examples[static_cast<std::size_t>(s)];
    const Mat<float> f = point_features<float>(ex.inputs, ex.outputs, n_variables);
    for (int i = 0; i < f.rows; ++i) {
      std::copy(f.row(i), f.row(i) + f.cols, b.features.row(s * b.max_points + i));
      b.point_mask[static_cast<std::size_t>(s * b.max_points + i)] = 1;
    }
    b.point_counts.push_back(f.rows);
    b.dims.push_back(static_cast<int>(ex.inputs.cols()));
    const int len = static_cast<int>(ex.symbols.size()) + 1;
    b.lengths.push_back(len);
    const std::size_t base = static_cast<std::size_t>(s) * static_cast<std::size_t>(b.max_length);
    b.input_tokens[base] = vocab.start();
    for (int i = 0; i < len; ++i) {
      const std::size_t at = base + static_cast<std::size_t>(i);
      if (i + 1 < len) {
        b.input_tokens[at + 1] = ex.symbols[static_cast<std::size_t>(i)];
        b.input_constants[at + 1] = static_cast<float>(ex.values[static_cast<std::size_t>(i)]);
      }
      const bool is_end = i == len - 1;
      const int target = is_end ? vocab.end() : ex.symbols[static_cast<std::size_t>(i)];
      b.target_tokens[at] = target;
      b.token_mask[at] = 1;
      if (!is_end && vocab.is_constant_token(target)) {
        b.constant_mask[at] = 1;
        b.target_constants[at] = static_cast<float>(ex.values[static_cast<std::size_t>(i)]);
      }
    }
  }
  return b;
}

template <class T>
Mat<T> Batch::sample_features(int s) const {
  const int n = point_counts.at(static_cast<std::size_t>(s));
  Mat<T> out(n, input_dim);
  for (int i = 0; i < n; ++i) {
    const float* src = features.row(s * max_points + i);
    for (int d = 0; d < input_dim; ++d) out(i, d) = static_cast<T>(src[d]);
  }
  return out;
}

namespace {

template <class V>
std::span<const V> row_span(const std::vector<V>& v, int s, int max_length, int len) {
  return std::span<const V>(v).subspan(static_cast<std::size_t>(s) * static_cast<std::size_t>(max_length),
                                       static_cast<std::size_t>(len));
}

}  // namespace

std::span<const int> Batch::sample_input_tokens(int s) const {
  return row_span(input_tokens, s, max_length, lengths.at(static_cast<std::size_t>(s)));
}
std::span<const int> Batch::sample_target_tokens(int s) const {
  return row_span(target_tokens, s, max_length, lengths.at(static_cast<std::size_t>(s)));
}
std::span<const float> Batch::sample_input_constants(int s) const {
  return row_span(input_constants, s, max_length, lengths.at(static_cast<std::size_t>(s)));
}
std::span<const float> Batch::sample_target_constants(int s) const {
  return row_span(target_constants, s, max_length, lengths.at(static_cast<std::size_t>(s)));
}
std::span<const std::uint8_t> Batch::sample_constant_mask(int s) const {
  return row_span(constant_mask, s, max_length, lengths.at(static_cast<std::size_t>(s)));
}

std::size_t Batch::token_count() const {
  return static_cast<std::size_t>(std::count(token_mask.begin(), token_mask.end(), std::uint8_t{1}));
}

std::size_t Batch::constant_count() const {
  return static_cast<std::size_t>(std::count(constant_mask.begin(), constant_mask.end(), std::uint8_t{1}));
}

template Mat<float> Batch::sample_features<float>(int) const;
template Mat<double> Batch::sample_features<double>(int) const;

}  // namespace symreg::nn
