#include "symreg/nn/layers.hpp"

#include <cmath>

#include "symreg/errors.hpp"

namespace symreg::nn {

template <class T>
Parameter<T>& ParamStore<T>::add(std::string name, int rows, int cols, Init init, Rng& rng) {
  Parameter<T> p{std::move(name), Mat<T>(rows, cols), Mat<T>(rows, cols)};
  switch (init) {
    case Init::Zeros: break;
    case Init::Ones: std::fill(p.value.data.begin(), p.value.data.end(), T(1)); break;
    case Init::Xavier: {
      const double limit = std::sqrt(6.0 / (rows + cols));
      for (auto& x : p.value.data) x = static_cast<T>(uniform(rng, -limit, limit));
      break;
    }
    case Init::Normal: {
      const double sd = 1.0 / std::sqrt(static_cast<double>(cols));
      for (auto& x : p.value.data) x = static_cast<T>(sd * standard_normal(rng));
      break;
    }
  }
  params_.push_back(std::move(p));
  return params_.back();
}

template <class T>
std::vector<Parameter<T>*> ParamStore<T>::all() {
  std::vector<Parameter<T>*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

template <class T>
std::vector<const Parameter<T>*> ParamStore<T>::all() const {
  std::vector<const Parameter<T>*> out;
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

template <class T>
std::size_t ParamStore<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

template <class T>
void ParamStore<T>::zero_grad() {
  for (auto& p : params_) p.grad.zero();
}

template <class T>
Linear<T>::Linear(ParamStore<T>& store, const std::string& name, int in, int out, Rng& rng)
    : w(&store.add(name + ".weight", in, out, Init::Xavier, rng)), b(&store.add(name + ".bias", 1, out, Init::Zeros, rng)) {}

template <class T>
Var Linear<T>::operator()(Graph<T>& g, Var x) const {
  return g.linear(x, g.param(*w), g.param(*b));
}

template <class T>
LayerNorm<T>::LayerNorm(ParamStore<T>& store, const std::string& name, int dim, Rng& rng)
    : gamma(&store.add(name + ".gamma", 1, dim, Init::Ones, rng)),
      beta(&store.add(name + ".beta", 1, dim, Init::Zeros, rng)) {}

template <class T>
Var LayerNorm<T>::operator()(Graph<T>& g, Var x) const {
  return g.layer_norm(x, g.param(*gamma), g.param(*beta));
}

template <class T>
Attention<T>::Attention(ParamStore<T>& store, const std::string& name, int query_dim, int kv_dim, int n_heads,
                        Rng& rng)
    : heads(n_heads),
      dim(query_dim),
      q(store, name + ".q", query_dim, query_dim, rng),
      k(store, name + ".k", kv_dim, query_dim, rng),
      v(store, name + ".v", kv_dim, query_dim, rng),
      o(store, name + ".o", query_dim, query_dim, rng) {
  if (n_heads <= 0 || query_dim % n_heads != 0) {
    fail(ErrorCode::InvalidArgument, name + ": head count must divide the model dimension");
  }
}

template <class T>
Var Attention<T>::operator()(Graph<T>& g, Var query, Var kv, bool causal) const {
  const Var qs = q(g, query);
  const Var ks = k(g, kv);
  const Var vs = v(g, kv);
  const int hd = dim / heads;
  const T scale = T(1) / std::sqrt(T(hd));
  std::vector<Var> outs;
  outs.reserve(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    const Var qh = heads == 1 ? qs : g.slice_cols(qs, h * hd, (h + 1) * hd);
    const Var kh = heads == 1 ? ks : g.slice_cols(ks, h * hd, (h + 1) * hd);
    const Var vh = heads == 1 ? vs : g.slice_cols(vs, h * hd, (h + 1) * hd);
    const Var scores = g.scale(g.matmul_nt(qh, kh), scale);
    outs.push_back(g.matmul(g.softmax_rows(scores, causal), vh));
  }
  const Var merged = heads == 1 ? outs[0] : g.concat_cols(outs);
  return o(g, merged);
}

template <class T>
FeedForward<T>::FeedForward(ParamStore<T>& store, const std::string& name, int dim, int hidden, Rng& rng)
    : in(store, name + ".in", dim, hidden, rng), out(store, name + ".out", hidden, dim, rng) {}

template <class T>
Var FeedForward<T>::operator()(Graph<T>& g, Var x) const {
  return out(g, g.gelu(in(g, x)));
}

template <class T>
Mab<T>::Mab(ParamStore<T>& store, const std::string& name, int dim, int kv_dim, int heads, int ff_dim, T p,
            Rng& rng)
    : att(store, name + ".att", dim, kv_dim, heads, rng),
      ff(store, name + ".ff", dim, ff_dim, rng),
      ln1(store, name + ".ln1", dim, rng),
      ln2(store, name + ".ln2", dim, rng),
      dropout(p) {}

template <class T>
Var Mab<T>::operator()(Graph<T>& g, Var x, Var y) const {
  const Var h = ln1(g, g.add(x, g.dropout(att(g, x, y, false), dropout)));
  return ln2(g, g.add(h, g.dropout(ff(g, h), dropout)));
}

template <class T>
Isab<T>::Isab(ParamStore<T>& store, const std::string& name, int dim, int heads, int ff_dim, int n_inducing, T p,
              Rng& rng)
    : inducing(&store.add(name + ".inducing", n_inducing, dim, Init::Xavier, rng)),
      to_inducing(store, name + ".mab0", dim, dim, heads, ff_dim, p, rng),
      from_inducing(store, name + ".mab1", dim, dim, heads, ff_dim, p, rng) {}

template <class T>
Var Isab<T>::operator()(Graph<T>& g, Var x) const {
  const Var h = to_inducing(g, g.param(*inducing), x);
  return from_inducing(g, x, h);
}

template <class T>
Pma<T>::Pma(ParamStore<T>& store, const std::string& name, int dim, int heads, int ff_dim, int n_seeds, T p,
            Rng& rng)
    : seeds(&store.add(name + ".seeds", n_seeds, dim, Init::Xavier, rng)),
      mab(store, name + ".mab", dim, dim, heads, ff_dim, p, rng) {}

template <class T>
Var Pma<T>::operator()(Graph<T>& g, Var x) const {
  return mab(g, g.param(*seeds), x);
}

template <class T>
DecoderLayer<T>::DecoderLayer(ParamStore<T>& store, const std::string& name, int dim, int memory_dim, int heads,
                              int ff_dim, T p, Rng& rng)
    : self_att(store, name + ".self", dim, dim, heads, rng),
      cross_att(store, name + ".cross", dim, memory_dim, heads, rng),
      ff(store, name + ".ff", dim, ff_dim, rng),
      ln1(store, name + ".ln1", dim, rng),
      ln2(store, name + ".ln2", dim, rng),
      ln3(store, name + ".ln3", dim, rng),
      dropout(p) {}

template <class T>
Var DecoderLayer<T>::operator()(Graph<T>& g, Var x, Var memory) const {
  Var h = ln1(g, g.add(x, g.dropout(self_att(g, x, x, true), dropout)));
  h = ln2(g, g.add(h, g.dropout(cross_att(g, h, memory, false), dropout)));
  return ln3(g, g.add(h, g.dropout(ff(g, h), dropout)));
}

template class ParamStore<float>;
template class ParamStore<double>;
template struct Linear<float>;
template struct Linear<double>;
template struct LayerNorm<float>;
template struct LayerNorm<double>;
template struct Attention<float>;
template struct Attention<double>;
template struct FeedForward<float>;
template struct FeedForward<double>;
template struct Mab<float>;
template struct Mab<double>;
template struct Isab<float>;
template struct Isab<double>;
template struct Pma<float>;
template struct Pma<double>;
template struct DecoderLayer<float>;
template struct DecoderLayer<double>;

}  // namespace symreg::nn
