#include "symreg/nn/model.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>

#include "symreg/errors.hpp"

namespace symreg::nn {

ModelConfig ModelConfig::desk() { return ModelConfig{}; }

ModelConfig ModelConfig::full() {
  ModelConfig c;
  c.encoder = EncoderConfig{384, 12, 4, 1536, 64, 32, 0.1};
  // 12 heads do not divide 512, so the decoder uses 8.
  c.decoder = DecoderConfig{512, 8, 2048, 4, 0.1, 52, 128};
  return c;
}

ModelConfig ModelConfig::tiny() {
  ModelConfig c;
  c.encoder = EncoderConfig{8, 2, 1, 16, 4, 2, 0.0};
  c.decoder = DecoderConfig{8, 2, 16, 1, 0.0, 52, 2};
  return c;
}

ModelConfig ModelConfig::preset(const std::string& name) {
  if (name == "desk") return desk();
  if (name == "full") return full();
  if (name == "tiny") return tiny();
  fail(ErrorCode::InvalidArgument, "unknown model preset: " + name);
}

void ModelConfig::validate() const {
  const auto& e = encoder;
  const auto& d = decoder;
  auto bad = [](const std::string& what) { fail(ErrorCode::InvalidArgument, "model config: " + what); };
  if (e.dim <= 0 || e.heads <= 0 || e.dim % e.heads != 0) bad("encoder heads must divide encoder dim");
  if (d.dim <= 0 || d.heads <= 0 || d.dim % d.heads != 0) bad("decoder heads must divide decoder dim");
  if (e.layers < 1 || d.layers < 1) bad("layer counts must be positive");
  if (e.ff_dim <= 0 || d.ff_dim <= 0) bad("feed-forward dims must be positive");
  if (e.inducing_points <= 0 || e.seed_vectors <= 0) bad("inducing points and seed vectors must be positive");
  if (e.dropout < 0 || e.dropout >= 1 || d.dropout < 0 || d.dropout >= 1) bad("dropout must be in [0, 1)");
  if (d.max_length < 2) bad("max_length must be at least 2");
  if (d.constant_dim <= 0 || d.constant_dim >= d.dim) bad("constant_dim must be in (0, decoder dim)");
  if (n_variables < 1 || n_variables > 2) bad("n_variables must be 1 or 2");
  if (vocab_size < 4) bad("vocab_size too small");
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{
      {"encoder",
       {{"dim", c.encoder.dim},
        {"heads", c.encoder.heads},
        {"layers", c.encoder.layers},
        {"ff_dim", c.encoder.ff_dim},
        {"inducing_points", c.encoder.inducing_points},
        {"seed_vectors", c.encoder.seed_vectors},
        {"dropout", c.encoder.dropout}}},
      {"decoder",
       {{"dim", c.decoder.dim},
        {"heads", c.decoder.heads},
        {"ff_dim", c.decoder.ff_dim},
        {"layers", c.decoder.layers},
        {"dropout", c.decoder.dropout},
        {"max_length", c.decoder.max_length},
        {"constant_dim", c.decoder.constant_dim}}},
      {"n_variables", c.n_variables},
      {"encoding", std::string(encoding_mode_name(c.encoding))},
      {"vocab_size", c.vocab_size},
  };
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  const auto& e = j.at("encoder");
  c.encoder = EncoderConfig{e.at("dim"),          e.at("heads"),        e.at("layers"), e.at("ff_dim"),
                            e.at("inducing_points"), e.at("seed_vectors"), e.at("dropout")};
  const auto& d = j.at("decoder");
  c.decoder = DecoderConfig{d.at("dim"),     d.at("heads"),      d.at("ff_dim"),      d.at("layers"),
                            d.at("dropout"), d.at("max_length"), d.at("constant_dim")};
  c.n_variables = j.at("n_variables");
  c.encoding = encoding_mode_from_name(j.at("encoding").get<std::string>());
  c.vocab_size = j.at("vocab_size");
}

template <class T>
Mat<T> point_features(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs, int n_variables) {
  if (inputs.rows() != outputs.size()) fail(ErrorCode::InvalidArgument, "inputs/outputs row mismatch");
  if (inputs.cols() > n_variables) fail(ErrorCode::InvalidArgument, "point set has more dimensions than the model");
  Mat<T> f(static_cast<int>(inputs.rows()), n_variables + 1);
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    T* r = f.row(static_cast<int>(i));
    for (Eigen::Index d = 0; d < inputs.cols(); ++d) r[d] = static_cast<T>(inputs(i, d));
    r[n_variables] = static_cast<T>(std::asinh(outputs[i]));
    for (int d = 0; d <= n_variables; ++d) {
      if (!std::isfinite(r[d])) fail(ErrorCode::InvalidArgument, "non-finite value in point set");
    }
  }
  return f;
}

template <class T>
Model<T>::Model(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  const auto& e = config_.encoder;
  const auto& d = config_.decoder;
  const T pe = static_cast<T>(e.dropout);
  const T pd = static_cast<T>(d.dropout);
  row_ff0_ = Linear<T>(store_, "encoder.row_ff0", config_.input_dim(), e.dim, rng);
  row_ff1_ = Linear<T>(store_, "encoder.row_ff1", e.dim, e.dim, rng);
  for (int l = 0; l < e.layers; ++l) {
    isabs_.emplace_back(store_, "encoder.isab" + std::to_string(l), e.dim, e.heads, e.ff_dim, e.inducing_points, pe,
                        rng);
  }
  pma_ = Pma<T>(store_, "encoder.pma", e.dim, e.heads, e.ff_dim, e.seed_vectors, pe, rng);
  const int embed_dim = d.dim - d.constant_dim;
  token_embedding_ = &store_.add("decoder.token_embedding", config_.vocab_size, embed_dim, Init::Normal, rng);
  position_embedding_ = &store_.add("decoder.position_embedding", d.max_length, embed_dim, Init::Normal, rng);
  constant_proj_ = Linear<T>(store_, "decoder.constant_proj", 1, d.constant_dim, rng);
  for (int l = 0; l < d.layers; ++l) {
    layers_.emplace_back(store_, "decoder.layer" + std::to_string(l), d.dim, e.dim, d.heads, d.ff_dim, pd, rng);
  }
  class_head_ = Linear<T>(store_, "decoder.class_head", d.dim, config_.vocab_size, rng);
  value_head_ = Linear<T>(store_, "decoder.value_head", d.dim, 1, rng);
}

template <class T>
Var Model<T>::encode(Graph<T>& g, const Mat<T>& features) const {
  if (features.cols != config_.input_dim()) fail(ErrorCode::InvalidArgument, "feature width mismatch");
  if (features.rows == 0) fail(ErrorCode::InvalidArgument, "empty point set");
  Var x = g.input(features);
  x = row_ff1_(g, g.gelu(row_ff0_(g, x)));
  for (const auto& isab : isabs_) x = isab(g, x);
  x = g.dropout(x, static_cast<T>(config_.encoder.dropout));
  return pma_(g, x);
}

template <class T>
typename Model<T>::DecoderOutput Model<T>::decode(Graph<T>& g, Var memory, std::span<const int> tokens,
                                                  std::span<const T> constants) const {
  const int len = static_cast<int>(tokens.size());
  if (len == 0) fail(ErrorCode::InvalidArgument, "empty decoder input");
  if (len > config_.decoder.max_length) {
    fail(ErrorCode::SequenceTooLong, "decoder input of length " + std::to_string(len) + " exceeds " +
                                         std::to_string(config_.decoder.max_length));
  }
  if (constants.size() != tokens.size()) fail(ErrorCode::InvalidArgument, "token/constant length mismatch");
  std::vector<int> positions(static_cast<std::size_t>(len));
  std::iota(positions.begin(), positions.end(), 0);
  const Var emb = g.add(g.gather_rows(g.param(*token_embedding_), tokens),
                        g.gather_rows(g.param(*position_embedding_), positions));
  Mat<T> cin(len, 1);
  std::copy(constants.begin(), constants.end(), cin.data.begin());
  const Var cproj = constant_proj_(g, g.input(std::move(cin)));
  const Var parts[] = {emb, cproj};
  Var x = g.dropout(g.concat_cols(parts), static_cast<T>(config_.decoder.dropout));
  for (const auto& layer : layers_) x = layer(g, x, memory);
  return {class_head_(g, x), value_head_(g, x)};
}

template <class T>
Mat<T> Model<T>::encode_points(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs) const {
  Graph<T> g(false);
  return g.value(encode(g, point_features<T>(inputs, outputs, config_.n_variables)));
}

template <class T>
typename Model<T>::Step Model<T>::decode_step(const Mat<T>& memory, std::span<const int> tokens,
                                              std::span<const T> constants) const {
  Graph<T> g(false);
  const auto out = decode(g, g.input(memory), tokens, constants);
  const Mat<T>& logits = g.value(out.logits);
  const int last = logits.rows - 1;
  const T* r = logits.row(last);
  Step step;
  step.probabilities.resize(static_cast<std::size_t>(logits.cols));
  double mx = r[0];
  for (int j = 1; j < logits.cols; ++j) mx = std::max(mx, static_cast<double>(r[j]));
  double sum = 0.0;
  for (int j = 0; j < logits.cols; ++j) {
    step.probabilities[static_cast<std::size_t>(j)] = std::exp(static_cast<double>(r[j]) - mx);
    sum += step.probabilities[static_cast<std::size_t>(j)];
  }
  for (auto& p : step.probabilities) p /= sum;
  step.value = static_cast<double>(g.value(out.values)(last, 0));
  return step;
}

template class Model<float>;
template class Model<double>;
template Mat<float> point_features(const Eigen::MatrixXd&, const Eigen::VectorXd&, int);
template Mat<double> point_features(const Eigen::MatrixXd&, const Eigen::VectorXd&, int);

}  // namespace symreg::nn
