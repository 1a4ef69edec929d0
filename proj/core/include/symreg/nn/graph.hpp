#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "symreg/nn/tensor.hpp"
#include "symreg/random.hpp"

namespace symreg::nn {

template <class T>
struct Parameter {
  std::string name;
  Mat<T> value;
  Mat<T> grad;
};

/// Handle of a node on a Graph.
using Var = int;

/// Reverse-mode tape over 2-D matrices. Built fresh for every forward pass;
/// with gradients disabled no backward closures are recorded.
template <class T>
class Graph {
 public:
  explicit Graph(bool record_gradients = true) : record_(record_gradients) {}

  bool records_gradients() const noexcept { return record_; }

  /// Random source for dropout; dropout is the identity while this is null.
  void set_dropout_rng(Rng* rng) noexcept { rng_ = rng; }

  Var input(Mat<T> value);
  Var param(Parameter<T>& p);

  const Mat<T>& value(Var v) const {
    const Node& n = nodes_[static_cast<std::size_t>(v)];
    return n.param ? n.param->value : n.value;
  }
  T scalar(Var v) const { return value(v).data.at(0); }

  Var matmul(Var a, Var b);
  /// a * b^T
  Var matmul_nt(Var a, Var b);
  /// x * w + bias, bias a 1 x out row broadcast over rows.
  Var linear(Var x, Var w, Var bias);
  Var add(Var a, Var b);
  Var scale(Var a, T s);
  Var gelu(Var a);
  /// Row-wise softmax. With `causal`, entry (i, j) for j > i is excluded.
  Var softmax_rows(Var a, bool causal);
  Var layer_norm(Var x, Var gamma, Var beta, T eps = T(1e-5));
  Var concat_cols(std::span<const Var> parts);
  Var slice_cols(Var a, int begin, int end);
  Var gather_rows(Var table, std::span<const int> ids);
  Var dropout(Var a, T p);
  /// Sum over rows of -log softmax(logits)[target]; rows with a negative
  /// target are skipped. Result is 1 x 1.
  Var cross_entropy_sum(Var logits, std::span<const int> targets);
  /// Sum over flagged rows of (pred(i, 0) - target[i])^2. Result is 1 x 1.
  Var masked_squared_error_sum(Var pred, std::span<const T> targets, std::span<const std::uint8_t> mask);
  /// sum_i w_i * x_i over 1 x 1 nodes.
  Var weighted_sum(std::span<const Var> xs, std::span<const T> weights);

  /// Seeds d(root)/d(root) = 1 and runs the tape backwards, accumulating into
  /// Parameter::grad.
  void backward(Var root);

 private:
  struct Node {
    Mat<T> value;
    Mat<T> grad;
    Parameter<T>* param = nullptr;
    bool needs_grad = false;
    std::function<void(Graph&, Node&)> back;
  };

  Var push(Mat<T> value, bool needs_grad);
  Node& node(Var v) { return nodes_[static_cast<std::size_t>(v)]; }
  bool needs(Var v) const { return nodes_[static_cast<std::size_t>(v)].needs_grad; }
  /// Gradient buffer of `v`, allocated on first use.
  Mat<T>& grad_of(Var v);

  std::vector<Node> nodes_;
  bool record_;
  Rng* rng_ = nullptr;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace symreg::nn
