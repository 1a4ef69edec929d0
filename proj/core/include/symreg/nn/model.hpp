#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <nlohmann/json_fwd.hpp>
#include <span>
#include <string>
#include <vector>

#include "symreg/nn/layers.hpp"
#include "symreg/vocabulary.hpp"

namespace symreg::nn {

struct EncoderConfig {
  int dim = 64;
  int heads = 4;
  int layers = 2;
  int ff_dim = 128;
  int inducing_points = 16;
  int seed_vectors = 8;
  double dropout = 0.0;
};

struct DecoderConfig {
  int dim = 64;
  int heads = 4;
  int ff_dim = 256;
  int layers = 2;
  double dropout = 0.0;
  /// Longest input prefix, start token included.
  int max_length = 52;
  /// Width of the projected constant concatenated to each token embedding.
  int constant_dim = 16;
};

struct ModelConfig {
  EncoderConfig encoder;
  DecoderConfig decoder;
  int n_variables = 2;
  EncodingMode encoding = EncodingMode::Extended;
  int vocab_size = 54;

  /// Small CPU-trainable model.
  static ModelConfig desk();
  /// The published hyperparameters.
  static ModelConfig full();
  /// Width 8, one encoder and one decoder layer; for gradient checks.
  static ModelConfig tiny();
  static ModelConfig preset(const std::string& name);

  int input_dim() const noexcept { return n_variables + 1; }
  void validate() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

/// Row per point: variables (zero for absent dimensions), then asinh(f).
template <class T>
Mat<T> point_features(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs, int n_variables);

template <class T>
class Model {
 public:
  Model(const ModelConfig& config, std::uint64_t seed);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const noexcept { return config_; }
  ParamStore<T>& params() noexcept { return store_; }
  const ParamStore<T>& params() const noexcept { return store_; }

  /// Fixed-size memory (seed_vectors x encoder dim) for one point set.
  Var encode(Graph<T>& g, const Mat<T>& features) const;

  struct DecoderOutput {
    Var logits;  // length x vocab
    Var values;  // length x 1
  };
  /// Teacher-forced pass over a whole input sequence. Throws SequenceTooLong
  /// when it exceeds max_length.
  DecoderOutput decode(Graph<T>& g, Var memory, std::span<const int> tokens, std::span<const T> constants) const;

  struct Step {
    std::vector<double> probabilities;
    double value = 0.0;
  };
  /// Next-token distribution and regression output after `tokens`.
  Step decode_step(const Mat<T>& memory, std::span<const int> tokens, std::span<const T> constants) const;
  Mat<T> encode_points(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs) const;

 private:
  ModelConfig config_;
  ParamStore<T> store_;
  Linear<T> row_ff0_, row_ff1_;
  std::vector<Isab<T>> isabs_;
  Pma<T> pma_;
  Parameter<T>* token_embedding_ = nullptr;
  Parameter<T>* position_embedding_ = nullptr;
  Linear<T> constant_proj_;
  std::vector<DecoderLayer<T>> layers_;
  Linear<T> class_head_, value_head_;
};

extern template class Model<float>;
extern template class Model<double>;
extern template Mat<float> point_features(const Eigen::MatrixXd&, const Eigen::VectorXd&, int);
extern template Mat<double> point_features(const Eigen::MatrixXd&, const Eigen::VectorXd&, int);

/// Copies parameter values between models of the same configuration.
template <class Dst, class Src>
void copy_parameters(Model<Dst>& dst, const Model<Src>& src) {
  auto d = dst.params().all();
  auto s = src.params().all();
  for (std::size_t i = 0; i < d.size() && i < s.size(); ++i) {
    for (std::size_t k = 0; k < d[i]->value.size(); ++k) d[i]->value.data[k] = static_cast<Dst>(s[i]->value.data[k]);
  }
}

}  // namespace symreg::nn
