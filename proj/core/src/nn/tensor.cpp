#include "symreg/nn/tensor.hpp"

#include <algorithm>
#include <cstring>

#include "symreg/errors.hpp"

namespace symreg::nn {

template <class T>
Mat<T> transpose(const Mat<T>& a) {
  Mat<T> t(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i) {
    const T* src = a.row(i);
    for (int j = 0; j < a.cols; ++j) t.data[static_cast<std::size_t>(j) * a.rows + i] = src[j];
  }
  return t;
}

namespace {

// 64-byte vectors; GCC lowers them to whatever the target supports.
template <class T>
struct VecOf;
template <>
struct VecOf<float> {
  typedef float type __attribute__((vector_size(64)));
};
template <>
struct VecOf<double> {
  typedef double type __attribute__((vector_size(64)));
};
template <class T>
using Vec = typename VecOf<T>::type;

template <class T>
constexpr int kLanes = 64 / static_cast<int>(sizeof(T));

template <class T>
inline Vec<T> load(const T* p) {
  Vec<T> v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

template <class T>
inline void store(T* p, const Vec<T>& v) {
  std::memcpy(p, &v, sizeof v);
}

/// C[rows, j0:j0+NV*lanes] (+)= A[rows, :] * B[:, j0:...] for R rows at once.
/// Every output element is accumulated in index order of the shared
/// dimension with the same multiply-add, whatever R and NV are, so all
/// paths round identically.
template <class T, int R, int NV>
inline void tile(int k, const T* const* a, std::size_t a_step, const T* b, int ldb, T* const* c, bool accumulate) {
  constexpr int L = kLanes<T>;
  Vec<T> acc[R][NV];
  for (int r = 0; r < R; ++r) {
    for (int v = 0; v < NV; ++v) acc[r][v] = accumulate ? load<T>(c[r] + v * L) : Vec<T>{};
  }
  for (int p = 0; p < k; ++p) {
    const T* bp = b + static_cast<std::size_t>(p) * ldb;
    Vec<T> bv[NV];
    for (int v = 0; v < NV; ++v) bv[v] = load<T>(bp + v * L);
    for (int r = 0; r < R; ++r) {
      const T s = a[r][static_cast<std::size_t>(p) * a_step];
      for (int v = 0; v < NV; ++v) acc[r][v] += s * bv[v];
    }
  }
  for (int r = 0; r < R; ++r) {
    for (int v = 0; v < NV; ++v) store<T>(c[r] + v * L, acc[r][v]);
  }
}

template <class T, int R>
inline void tile_tail(int k, int w, const T* const* a, std::size_t a_step, const T* b, int ldb, T* const* c,
                      bool accumulate) {
  for (int r = 0; r < R; ++r) {
    for (int j = 0; j < w; ++j) {
      T acc = accumulate ? c[r][j] : T(0);
      for (int p = 0; p < k; ++p) acc += a[r][static_cast<std::size_t>(p) * a_step] * b[static_cast<std::size_t>(p) * ldb + j];
      c[r][j] = acc;
    }
  }
}

template <class T, int R>
void row_block(int n, int k, const T* const* a, std::size_t a_step, const T* b, T* const* c, bool accumulate) {
  constexpr int W = 2 * kLanes<T>;
  int j0 = 0;
  const T* cols_a[R];
  T* cols_c[R];
  for (; j0 + W <= n; j0 += W) {
    for (int r = 0; r < R; ++r) {
      cols_a[r] = a[r];
      cols_c[r] = c[r] + j0;
    }
    tile<T, R, 2>(k, cols_a, a_step, b + j0, n, cols_c, accumulate);
  }
  if (j0 + W / 2 <= n) {
    for (int r = 0; r < R; ++r) cols_c[r] = c[r] + j0;
    tile<T, R, 1>(k, a, a_step, b + j0, n, cols_c, accumulate);
    j0 += W / 2;
  }
  if (j0 < n) {
    for (int r = 0; r < R; ++r) cols_c[r] = c[r] + j0;
    tile_tail<T, R>(k, n - j0, a, a_step, b + j0, n, cols_c, accumulate);
  }
}

/// C (m x n) (+)= A * B with B row-major k x n. Row i of A starts at
/// a + i * a_row and consecutive shared-dimension entries are a_step apart.
template <class T>
void gemm_kernel(int m, int n, int k, const T* a, std::size_t a_row, std::size_t a_step, const T* b, T* c,
                 bool accumulate) {
  constexpr int R = 4;
  int i = 0;
  for (; i + R <= m; i += R) {
    const T* rows_a[R];
    T* rows_c[R];
    for (int r = 0; r < R; ++r) {
      rows_a[r] = a + static_cast<std::size_t>(i + r) * a_row;
      rows_c[r] = c + static_cast<std::size_t>(i + r) * n;
    }
    row_block<T, R>(n, k, rows_a, a_step, b, rows_c, accumulate);
  }
  for (; i < m; ++i) {
    const T* rows_a[1] = {a + static_cast<std::size_t>(i) * a_row};
    T* rows_c[1] = {c + static_cast<std::size_t>(i) * n};
    row_block<T, 1>(n, k, rows_a, a_step, b, rows_c, accumulate);
  }
}

}  // namespace

template <class T>
void gemm(const Mat<T>& a, bool trans_a, const Mat<T>& b, bool trans_b, Mat<T>& c, bool accumulate) {
  const int m = trans_a ? a.cols : a.rows;
  const int k = trans_a ? a.rows : a.cols;
  const int kb = trans_b ? b.cols : b.rows;
  const int n = trans_b ? b.rows : b.cols;
  if (k != kb) fail(ErrorCode::InvalidArgument, "gemm: inner dimensions differ");
  if (accumulate) {
    if (c.rows != m || c.cols != n) fail(ErrorCode::InvalidArgument, "gemm: output shape mismatch");
  } else if (c.rows != m || c.cols != n) {
    c = Mat<T>(m, n);
  }
  if (m == 0 || n == 0) return;
  if (k == 0) {
    if (!accumulate) c.zero();
    return;
  }
  const Mat<T> bt = trans_b ? transpose(b) : Mat<T>();
  const T* pb = trans_b ? bt.data.data() : b.data.data();
  // A^T is read in place: its row i is column i of A.
  const std::size_t a_row = trans_a ? 1 : static_cast<std::size_t>(a.cols);
  const std::size_t a_step = trans_a ? static_cast<std::size_t>(a.cols) : 1;
  gemm_kernel(m, n, k, a.data.data(), a_row, a_step, pb, c.data.data(), accumulate);
}

template Mat<float> transpose(const Mat<float>&);
template Mat<double> transpose(const Mat<double>&);
template void gemm(const Mat<float>&, bool, const Mat<float>&, bool, Mat<float>&, bool);
template void gemm(const Mat<double>&, bool, const Mat<double>&, bool, Mat<double>&, bool);

}  // namespace symreg::nn
