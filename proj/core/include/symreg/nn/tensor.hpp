#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace symreg::nn {

/// Dense row-major matrix. Every activation in the network is two-dimensional
/// (rows are points or sequence positions).
template <class T>
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  Mat() = default;
  Mat(int r, int c, T fill = T(0)) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  bool empty() const noexcept { return data.empty(); }
  std::size_t size() const noexcept { return data.size(); }
  T& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  T operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  T* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const T* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
  void zero() { std::fill(data.begin(), data.end(), T(0)); }
};

template <class T>
Mat<T> transpose(const Mat<T>& a);

/// C (+)= op(A) * op(B). Each output element accumulates over the shared
/// dimension in index order and the result of a row does not depend on how
/// many other rows are present, so causal prefixes reproduce bit for bit.
template <class T>
void gemm(const Mat<T>& a, bool trans_a, const Mat<T>& b, bool trans_b, Mat<T>& c, bool accumulate);

extern template Mat<float> transpose(const Mat<float>&);
extern template Mat<double> transpose(const Mat<double>&);
extern template void gemm(const Mat<float>&, bool, const Mat<float>&, bool, Mat<float>&, bool);
extern template void gemm(const Mat<double>&, bool, const Mat<double>&, bool, Mat<double>&, bool);

}  // namespace symreg::nn
