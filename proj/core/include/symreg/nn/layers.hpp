#pragma once

#include <deque>
#include <string>
#include <vector>

#include "symreg/nn/graph.hpp"
#include "symreg/random.hpp"

namespace symreg::nn {

enum class Init { Zeros, Ones, Xavier, Normal };

/// Owns parameters at stable addresses, in creation order.
template <class T>
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;

  Parameter<T>& add(std::string name, int rows, int cols, Init init, Rng& rng);
  std::vector<Parameter<T>*> all();
  std::vector<const Parameter<T>*> all() const;
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::deque<Parameter<T>> params_;
};

template <class T>
struct Linear {
  Parameter<T>* w = nullptr;
  Parameter<T>* b = nullptr;

  Linear() = default;
  Linear(ParamStore<T>& store, const std::string& name, int in, int out, Rng& rng);
  Var operator()(Graph<T>& g, Var x) const;
};

template <class T>
struct LayerNorm {
  Parameter<T>* gamma = nullptr;
  Parameter<T>* beta = nullptr;

  LayerNorm() = default;
  LayerNorm(ParamStore<T>& store, const std::string& name, int dim, Rng& rng);
  Var operator()(Graph<T>& g, Var x) const;
};

/// Multi-head attention. Queries keep their width; keys and values may come
/// from a space of a different width.
template <class T>
struct Attention {
  int heads = 1;
  int dim = 0;
  Linear<T> q, k, v, o;

  Attention() = default;
  Attention(ParamStore<T>& store, const std::string& name, int query_dim, int kv_dim, int heads, Rng& rng);
  Var operator()(Graph<T>& g, Var query, Var kv, bool causal) const;
};

template <class T>
struct FeedForward {
  Linear<T> in, out;

  FeedForward() = default;
  FeedForward(ParamStore<T>& store, const std::string& name, int dim, int hidden, Rng& rng);
  Var operator()(Graph<T>& g, Var x) const;
};

/// Multihead attention block: H = LN(X + Att(X, Y)), out = LN(H + FF(H)).
template <class T>
struct Mab {
  Attention<T> att;
  FeedForward<T> ff;
  LayerNorm<T> ln1, ln2;
  T dropout = 0;

  Mab() = default;
  Mab(ParamStore<T>& store, const std::string& name, int dim, int kv_dim, int heads, int ff_dim, T dropout, Rng& rng);
  Var operator()(Graph<T>& g, Var x, Var y) const;
};

/// Induced set attention block: MAB(X, MAB(I, X)) with trainable inducing points I.
template <class T>
struct Isab {
  Parameter<T>* inducing = nullptr;
  Mab<T> to_inducing, from_inducing;

  Isab() = default;
  Isab(ParamStore<T>& store, const std::string& name, int dim, int heads, int ff_dim, int n_inducing, T dropout,
       Rng& rng);
  Var operator()(Graph<T>& g, Var x) const;
};

/// Pooling by multihead attention against trainable seed vectors.
template <class T>
struct Pma {
  Parameter<T>* seeds = nullptr;
  Mab<T> mab;

  Pma() = default;
  Pma(ParamStore<T>& store, const std::string& name, int dim, int heads, int ff_dim, int n_seeds, T dropout, Rng& rng);
  Var operator()(Graph<T>& g, Var x) const;
};

/// Post-norm decoder layer: causal self-attention, cross-attention to the
/// encoder memory, feed-forward.
template <class T>
struct DecoderLayer {
  Attention<T> self_att, cross_att;
  FeedForward<T> ff;
  LayerNorm<T> ln1, ln2, ln3;
  T dropout = 0;

  DecoderLayer() = default;
  DecoderLayer(ParamStore<T>& store, const std::string& name, int dim, int memory_dim, int heads, int ff_dim,
               T dropout, Rng& rng);
  Var operator()(Graph<T>& g, Var x, Var memory) const;
};

extern template class ParamStore<float>;
extern template class ParamStore<double>;
extern template struct Linear<float>;
extern template struct Linear<double>;
extern template struct LayerNorm<float>;
extern template struct LayerNorm<double>;
extern template struct Attention<float>;
extern template struct Attention<double>;
extern template struct FeedForward<float>;
extern template struct FeedForward<double>;
extern template struct Mab<float>;
extern template struct Mab<double>;
extern template struct Isab<float>;
extern template struct Isab<double>;
extern template struct Pma<float>;
extern template struct Pma<double>;
extern template struct DecoderLayer<float>;
extern template struct DecoderLayer<double>;

}  // namespace symreg::nn
