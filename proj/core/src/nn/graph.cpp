#include "symreg/nn/graph.hpp"

#include <cmath>
#include <numbers>

#include "symreg/errors.hpp"

namespace symreg::nn {

namespace {

void check(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::InvalidArgument, std::string("graph: ") + what);
}

}  // namespace

template <class T>
Var Graph<T>::push(Mat<T> value, bool needs_grad) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad && record_;
  nodes_.push_back(std::move(n));
  return static_cast<Var>(nodes_.size() - 1);
}

template <class T>
Mat<T>& Graph<T>::grad_of(Var v) {
  Node& n = node(v);
  if (n.param) {
    if (n.param->grad.rows != n.param->value.rows || n.param->grad.cols != n.param->value.cols) {
      n.param->grad = Mat<T>(n.param->value.rows, n.param->value.cols);
    }
    return n.param->grad;
  }
  if (n.grad.empty() && !n.value.empty()) n.grad = Mat<T>(n.value.rows, n.value.cols);
  return n.grad;
}

template <class T>
Var Graph<T>::input(Mat<T> value) {
  return push(std::move(value), false);
}

template <class T>
Var Graph<T>::param(Parameter<T>& p) {
  Node n;
  n.param = &p;
  n.needs_grad = record_;
  nodes_.push_back(std::move(n));
  return static_cast<Var>(nodes_.size() - 1);
}

template <class T>
Var Graph<T>::matmul(Var a, Var b) {
  Mat<T> out;
  gemm(value(a), false, value(b), false, out, false);
  const Var v = push(std::move(out), needs(a) || needs(b));
  if (node(v).needs_grad) {
    node(v).back = [a, b](Graph& g, Node& n) {
      if (g.needs(a)) gemm(n.grad, false, g.value(b), true, g.grad_of(a), true);
      if (g.needs(b)) gemm(g.value(a), true, n.grad, false, g.grad_of(b), true);
    };
  }
  return v;
}

template <class T>
Var Graph<T>::matmul_nt(Var a, Var b) {
  Mat<T> out;
  gemm(value(a), false, value(b), true, out, false);
  const Var v = push(std::move(out), needs(a) || needs(b));
  if (node(v).needs_grad) {
    node(v).back = [a, b](Graph& g, Node& n) {
      if (g.needs(a)) gemm(n.grad, false, g.value(b), false, g.grad_of(a), true);
      if (g.needs(b)) gemm(n.grad, true, g.value(a), false, g.grad_of(b), true);
    };
  }
  return v;
}

template <class T>
Var Graph<T>::linear(Var x, Var w, Var bias) {
  const Mat<T>& bv = value(bias);
  check(bv.rows == 1 && bv.cols == value(w).cols, "linear bias shape");
  Mat<T> out;
  gemm(value(x), false, value(w), false, out, false);
  for (int i = 0; i < out.rows; ++i) {
    T* r = out.row(i);
    for (int j = 0; j < out.cols; ++j) r[j] += bv.data[static_cast<std::size_t>(j)];
  }
  const Var v = push(std::move(out), needs(x) || needs(w) || needs(bias));
  if (node(v).needs_grad) {
    node(v).back = [x, w, bias](Graph& g, Node& n) {
      if (g.needs(x)) gemm(n.grad, false, g.value(w), true, g.grad_of(x), true);
      if (g.needs(w)) gemm(g.value(x), true, n.grad, false, g.grad_of(w), true);
      if (g.needs(bias)) {
        Mat<T>& gb = g.grad_of(bias);
        for (int i = 0; i < n.grad.rows; ++i) {
          const T* r = n.grad.row(i);
          for (int j = 0; j < n.grad.cols; ++j) gb.data[static_cast<std::size_t>(j)] += r[j];
        }
      }
    };
  }
  return v;
}

template <class T>
Var Graph<T>::add(Var a, Var b) {
  const Mat<T>& av = value(a);
  const Mat<T>& bv = value(b);
  check(av.rows == bv.rows && av.cols == bv.cols, "add shape");
  Mat<T> out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += bv.data[i];
  const Var v = push(std::move(out), needs(a) || needs(b));
  if (node(v).needs_grad) {
    node(v).back = [a, b](Graph& g, Node& n) {
      for (Var t : {a, b}) {
        if (!g.needs(t)) continue;
        Mat<T>& gt = g.grad_of(t);
        for (std::size_t i = 0; i < gt.size(); ++i) gt.data[i] += n.grad.data[i];
      }
    };
  }
  return v;
}

template <class T>
Var Graph<T>::scale(Var a, T s) {
  Mat<T> out = value(a);
  for (auto& x : out.data) x *= s;
  const Var v = push(std::move(out), needs(a));
  if (node(v).needs_grad) {
    node(v).back = [a, s](Graph& g, Node& n) {
      Mat<T>& ga = g.grad_of(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += s * n.grad.data[i];
    };
  }
  return v;
}

template <class T>
Var Graph<T>::gelu(Var a) {
  const Mat<T>& av = value(a);
  Mat<T> out(av.rows, av.cols);
  const T inv_sqrt2 = T(1) / std::sqrt(T(2));
  for (std::size_t i = 0; i < av.size(); ++i) {
    const T x = av.data[i];
    out.data[i] = T(0.5) * x * (T(1) + std::erf(x * inv_sqrt2));
  }
  const Var v = push(std::move(out), needs(a));
  if (node(v).needs_grad) {
    node(v).back = [a, inv_sqrt2](Graph& g, Node& n) {
      const Mat<T>& x = g.value(a);
      Mat<T>& ga = g.grad_of(a);
      const T inv_sqrt2pi = T(1) / std::sqrt(T(2) * std::numbers::pi_v<T>);
      for (std::size_t i = 0; i < ga.size(); ++i) {
        const T xi = x.data[i];
        const T cdf = T(0.5) * (T(1) + std::erf(xi * inv_sqrt2));
        const T pdf = inv_sqrt2pi * std::exp(T(-0.5) * xi * xi);
        ga.data[i] += n.grad.data[i] * (cdf + xi * pdf);
      }
    };
  }
  return v;
}

template <class T>
Var Graph<T>::softmax_rows(Var a, bool causal) {
  const Mat<T>& av = value(a);
  check(!causal || av.cols >= av.rows, "causal softmax needs cols >= rows");
  Mat<T> out(av.rows, av.cols);
  for (int i = 0; i < av.rows; ++i) {
    const int len = causal ? i + 1 : av.cols;
    const T* r = av.row(i);
    T* o = out.row(i);
    T mx = r[0];
    for (int j = 1; j < len; ++j) mx = std::max(mx, r[j]);
    T sum = 0;
    for (int j = 0; j < len; ++j) {
      o[j] = std::exp(r[j] - mx);
      sum += o[j];
    }
    const T inv = T(1) / sum;
    for (int j = 0; j < len; ++j) o[j] *= inv;
  }
  const Var v = push(std::move(out), needs(a));
  if (node(v).needs_grad) {
    node(v).back = [a, causal](Graph& g, Node& n) {
      Mat<T>& ga = g.grad_of(a);
      for (int i = 0; i < n.value.rows; ++i) {
        const int len = causal ? i + 1 : n.value.cols;
        const T* y = n.value.row(i);
        const T* dy = n.grad.row(i);
        T dot = 0;
        for (int j = 0; j < len; ++j) dot += y[j] * dy[j];
        T* gr = ga.row(i);
        for (int j = 0; j < len; ++j) gr[j] += y[j] * (dy[j] - dot);
      }
    };
  }
  return v;
}

template <class T>
Var Graph<T>::layer_norm(Var x, Var gamma, Var beta, T eps) {
  const Mat<T>& xv = value(x);
  const Mat<T>& gv = value(gamma);
  const Mat<T>& bv = value(beta);
  check(gv.size() == static_cast<std::size_t>(xv.cols) && bv.size() == gv.size(), "layer_norm shape");
  const int d = xv.cols;
  Mat<T> out(xv.rows, d);
  // Per row: normalized values and 1/std, kept for the backward pass.
  auto xhat = std::make_shared<Mat<T>>(xv.rows, d);
  auto rstd = std::make_shared<std::vector<T>>(static_cast<std::size_t>(xv.rows));
  for (int i = 0; i < xv.rows; ++i) {
    const T* r = xv.row(i);
    T mean = 0;
    for (int j = 0; j < d; ++j) mean += r[j];
    mean /= T(d);
    T var = 0;
    for (int j = 0; j < d; ++j) var += (r[j] - mean) * (r[j] - mean);
    var /= T(d);
    const T rs = T(1) / std::sqrt(var + eps);
    (*rstd)[static_cast<std::size_t>(i)] = rs;
    T* h = xhat->row(i);
    T* o = out.row(i);
    for (int j = 0; j < d; ++j) {
      h[j] = (r[j] - mean) * rs;
      o[j] = h[j] * gv.data[static_cast<std::size_t>(j)] + bv.data[static_cast<std::size_t>(j)];
    }
  }
  const Var v = push(std::move(out), needs(x) || needs(gamma) || needs(beta));
  if (node(v).needs_grad) {
    node(v).back = [x, gamma, beta, xhat, rstd](Graph& g, Node& n) {
      const int rows = n.grad.rows;
      const int d = n.grad.cols;
      const Mat<T>& gv = g.value(gamma);
      if (g.needs(gamma) || g.needs(beta)) {
        Mat<T>* gg = g.needs(gamma) ? &g.grad_of(gamma) : nullptr;
        Mat<T>* gb = g.needs(beta) ? &g.grad_of(beta) : nullptr;
        for (int i = 0; i < rows; ++i) {
          const T* dy = n.grad.row(i);
          const T* h = xhat->row(i);
          for (int j = 0; j < d; ++j) {
            if (gg) gg->data[static_cast<std::size_t>(j)] += dy[j] * h[j];
            if (gb) gb->data[static_cast<std::size_t>(j)] += dy[j];
          }
        }
      }
      if (g.needs(x)) {
        Mat<T>& gx = g.grad_of(x);
        std::vector<T> dh(static_cast<std::size_t>(d));
        for (int i = 0; i < rows; ++i) {
          const T* dy = n.grad.row(i);
          const T* h = xhat->row(i);
          T mean_dh = 0, mean_dh_h = 0;
          for (int j = 0; j < d; ++j) {
            dh[static_cast<std::size_t>(j)] = dy[j] * gv.data[static_cast<std::size_t>(j)];
            mean_dh += dh[static_cast<std::size_t>(j)];
            mean_dh_h += dh[static_cast<std::size_t>(j)] * h[j];
          }
          mean_dh /= T(d);
          mean_dh_h /= T(d);
          const T rs = (*rstd)[static_cast<std::size_t>(i)];
          T* gr = gx.row(i);
          for (int j = 0; j < d; ++j) gr[j] += rs * (dh[static_cast<std::size_t>(j)] - mean_dh - h[j] * mean_dh_h);
        }
      }
    };
  }
  return v;
}

template <class T>
Var Graph<T>::concat_cols(std::span<const Var> parts) {
  check(!parts.empty(), "concat of nothing");
  const int rows = value(parts[0]).rows;
  int cols = 0;
  bool any = false;
  for (Var p : parts) {
    check(value(p).rows == rows, "concat row mismatch");
    cols += value(p).cols;
    any = any || needs(p);
  }
  Mat<T> out(rows, cols);
  int offset = 0;
  for (Var p : parts) {
    const Mat<T>& pv = value(p);
    for (int i = 0; i < rows; ++i) std::copy(pv.row(i), pv.row(i) + pv.cols, out.row(i) + offset);
    offset += pv.cols;
  }
  const Var v = push(std::move(out), any);
  if (node(v).needs_grad) {
    std::vector<Var> ps(parts.begin(), parts.end());
    node(v).back = [ps](Graph& g, Node& n) {
      int offset = 0;
      for (Var p : ps) {
        const int c = g.value(p).cols;
        if (g.needs(p)) {
          Mat<T>& gp = g.grad_of(p);
          for (int i = 0; i < n.grad.rows; ++i) {
            const T* src = n.grad.row(i) + offset;
            T* dst = gp.row(i);
            for (int j = 0; j < c; ++j) dst[j] += src[j];
          }
        }
        offset += c;
      }
    };
  }
  return v;
}

template <class T>
Var Graph<T>::slice_cols(Var a, int begin, int end) {
  const Mat<T>& av = value(a);
  check(0 <= begin && begin <= end && end <= av.cols, "slice bounds");
  Mat<T> out(av.rows, end - begin);
  for (int i = 0; i < av.rows; ++i) std::copy(av.row(i) + begin, av.row(i) + end, out.row(i));
  const Var v = push(std::move(out), needs(a));
  if (node(v).needs_grad) {
    node(v).back = [a, begin](Graph& g, Node& n) {
      Mat<T>& ga = g.grad_of(a);
      for (int i = 0; i < n.grad.rows; ++i) {
        const T* src = n.grad.row(i);
        T* dst = ga.row(i) + begin;
        for (int j = 0; j < n.grad.cols; ++j) dst[j] += src[j];
      }
    };
  }
  return v;
}

template <class T>
Var Graph<T>::gather_rows(Var table, std::span<const int> ids) {
  const Mat<T>& tv = value(table);
  Mat<T> out(static_cast<int>(ids.size()), tv.cols);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    check(ids[i] >= 0 && ids[i] < tv.rows, "gather index out of range");
    std::copy(tv.row(ids[i]), tv.row(ids[i]) + tv.cols, out.row(static_cast<int>(i)));
  }
  const Var v = push(std::move(out), needs(table));
  if (node(v).needs_grad) {
    std::vector<int> idx(ids.begin(), ids.end());
    node(v).back = [table, idx](Graph& g, Node& n) {
      Mat<T>& gt = g.grad_of(table);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const T* src = n.grad.row(static_cast<int>(i));
        T* dst = gt.row(idx[i]);
        for (int j = 0; j < n.grad.cols; ++j) dst[j] += src[j];
      }
    };
  }
  return v;
}

template <class T>
Var Graph<T>::dropout(Var a, T p) {
  if (rng_ == nullptr || p <= T(0)) return a;
  const Mat<T>& av = value(a);
  auto keep = std::make_shared<Mat<T>>(av.rows, av.cols);
  const T s = T(1) / (T(1) - p);
  Mat<T> out(av.rows, av.cols);
  for (std::size_t i = 0; i < av.size(); ++i) {
    keep->data[i] = uniform01(*rng_) >= static_cast<double>(p) ? s : T(0);
    out.data[i] = av.data[i] * keep->data[i];
  }
  const Var v = push(std::move(out), needs(a));
  if (node(v).needs_grad) {
    node(v).back = [a, keep](Graph& g, Node& n) {
      Mat<T>& ga = g.grad_of(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += n.grad.data[i] * keep->data[i];
    };
  }
  return v;
}

template <class T>
Var Graph<T>::cross_entropy_sum(Var logits, std::span<const int> targets) {
  const Mat<T>& lv = value(logits);
  check(static_cast<int>(targets.size()) == lv.rows, "cross entropy target count");
  auto probs = std::make_shared<Mat<T>>(lv.rows, lv.cols);
  T total = 0;
  for (int i = 0; i < lv.rows; ++i) {
    const int t = targets[static_cast<std::size_t>(i)];
    if (t < 0) continue;
    check(t < lv.cols, "cross entropy target out of range");
    const T* r = lv.row(i);
    T mx = r[0];
    for (int j = 1; j < lv.cols; ++j) mx = std::max(mx, r[j]);
    T sum = 0;
    T* pr = probs->row(i);
    for (int j = 0; j < lv.cols; ++j) {
      pr[j] = std::exp(r[j] - mx);
      sum += pr[j];
    }
    for (int j = 0; j < lv.cols; ++j) pr[j] /= sum;
    total += std::log(sum) + mx - r[t];
  }
  const Var v = push(Mat<T>(1, 1, total), needs(logits));
  if (node(v).needs_grad) {
    std::vector<int> ts(targets.begin(), targets.end());
    node(v).back = [logits, ts, probs](Graph& g, Node& n) {
      Mat<T>& gl = g.grad_of(logits);
      const T s = n.grad.data[0];
      for (int i = 0; i < gl.rows; ++i) {
        const int t = ts[static_cast<std::size_t>(i)];
        if (t < 0) continue;
        const T* pr = probs->row(i);
        T* gr = gl.row(i);
        for (int j = 0; j < gl.cols; ++j) gr[j] += s * pr[j];
        gr[t] -= s;
      }
    };
  }
  return v;
}

template <class T>
Var Graph<T>::masked_squared_error_sum(Var pred, std::span<const T> targets, std::span<const std::uint8_t> mask) {
  const Mat<T>& pv = value(pred);
  check(pv.cols == 1 && static_cast<std::size_t>(pv.rows) == targets.size() && targets.size() == mask.size(),
        "masked squared error shape");
  T total = 0;
  for (int i = 0; i < pv.rows; ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const T r = pv.data[static_cast<std::size_t>(i)] - targets[static_cast<std::size_t>(i)];
    total += r * r;
  }
  const Var v = push(Mat<T>(1, 1, total), needs(pred));
  if (node(v).needs_grad) {
    std::vector<T> tg(targets.begin(), targets.end());
    std::vector<std::uint8_t> mk(mask.begin(), mask.end());
    node(v).back = [pred, tg, mk](Graph& g, Node& n) {
      Mat<T>& gp = g.grad_of(pred);
      const Mat<T>& pv = g.value(pred);
      const T s = n.grad.data[0];
      for (std::size_t i = 0; i < tg.size(); ++i) {
        if (mk[i]) gp.data[i] += s * T(2) * (pv.data[i] - tg[i]);
      }
    };
  }
  return v;
}

template <class T>
Var Graph<T>::weighted_sum(std::span<const Var> xs, std::span<const T> weights) {
  check(xs.size() == weights.size(), "weighted sum size");
  T total = 0;
  bool any = false;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    total += weights[i] * scalar(xs[i]);
    any = any || needs(xs[i]);
  }
  const Var v = push(Mat<T>(1, 1, total), any);
  if (node(v).needs_grad) {
    std::vector<Var> vs(xs.begin(), xs.end());
    std::vector<T> ws(weights.begin(), weights.end());
    node(v).back = [vs, ws](Graph& g, Node& n) {
      for (std::size_t i = 0; i < vs.size(); ++i) {
        if (g.needs(vs[i]) && ws[i] != T(0)) g.grad_of(vs[i]).data[0] += ws[i] * n.grad.data[0];
      }
    };
  }
  return v;
}

template <class T>
void Graph<T>::backward(Var root) {
  check(record_, "backward on a graph without gradients");
  check(value(root).size() == 1, "backward root must be scalar");
  if (!needs(root)) return;
  grad_of(root).data[0] += T(1);
  for (std::size_t k = static_cast<std::size_t>(root) + 1; k-- > 0;) {
    Node& n = nodes_[k];
    if (!n.needs_grad || !n.back || n.grad.empty()) continue;
    n.back(*this, n);
  }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace symreg::nn
