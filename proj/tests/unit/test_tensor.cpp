#include <doctest.h>

#include <random>

#include "symreg/nn/tensor.hpp"

using namespace symreg::nn;

namespace {

template <class T>
Mat<T> random_mat(int r, int c, std::mt19937_64& gen) {
  std::normal_distribution<double> n;
  Mat<T> m(r, c);
  for (auto& v : m.data) v = static_cast<T>(n(gen));
  return m;
}

template <class T>
Mat<T> naive(const Mat<T>& a, bool ta, const Mat<T>& b, bool tb) {
  const int m = ta ? a.cols : a.rows, k = ta ? a.rows : a.cols, n = tb ? b.rows : b.cols;
  Mat<T> c(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      long double s = 0;
      for (int p = 0; p < k; ++p) s += static_cast<long double>(ta ? a(p, i) : a(i, p)) * (tb ? b(j, p) : b(p, j));
      c(i, j) = static_cast<T>(s);
    }
  }
  return c;
}

template <class T>
void check_gemm(double tol) {
  std::mt19937_64 gen(1);
  for (int m : {1, 3, 4, 7, 33}) {
    for (int k : {1, 5, 16, 40}) {
      for (int n : {1, 2, 15, 16, 17, 70}) {
        for (int flags = 0; flags < 4; ++flags) {
          const bool ta = flags & 1, tb = flags & 2;
          const auto a = ta ? random_mat<T>(k, m, gen) : random_mat<T>(m, k, gen);
          const auto b = tb ? random_mat<T>(n, k, gen) : random_mat<T>(k, n, gen);
          Mat<T> c;
          gemm(a, ta, b, tb, c, false);
          const auto want = naive(a, ta, b, tb);
          REQUIRE(c.rows == m);
          REQUIRE(c.cols == n);
          for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::abs(c.data[i] - want.data[i]) <= tol * (1 + k));
          Mat<T> acc = c;
          gemm(a, ta, b, tb, acc, true);
          for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::abs(acc.data[i] - 2 * want.data[i]) <= 2 * tol * (1 + k));
        }
      }
    }
  }
}

}  // namespace

TEST_SUITE("tensor") {
  TEST_CASE("gemm matches a reference product") {
    check_gemm<double>(1e-13);
    check_gemm<float>(1e-5);
  }

  TEST_CASE("rows do not depend on the other rows") {
    std::mt19937_64 gen(2);
    const auto a = random_mat<float>(9, 24, gen);
    const auto b = random_mat<float>(24, 37, gen);
    Mat<float> full;
    gemm(a, false, b, false, full, false);
    for (int rows = 1; rows <= 9; ++rows) {
      Mat<float> part(rows, 24);
      std::copy(a.data.begin(), a.data.begin() + rows * 24, part.data.begin());
      Mat<float> c;
      gemm(part, false, b, false, c, false);
      for (std::size_t i = 0; i < c.size(); ++i) CHECK(c.data[i] == full.data[i]);
    }
  }

  TEST_CASE("transpose") {
    std::mt19937_64 gen(3);
    const auto a = random_mat<double>(5, 3, gen);
    const auto t = transpose(a);
    CHECK(t.rows == 3);
    CHECK(t.cols == 5);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 3; ++j) CHECK(t(j, i) == a(i, j));
    }
  }
}
