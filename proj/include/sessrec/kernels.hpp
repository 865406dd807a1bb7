#pragma once

#include <cmath>
#include <cstdint>

namespace sessrec::kernels {

// Dot product with eight independent accumulators. The compiler will not
// reassociate FP reductions on its own, so the unroll is spelled out; the
// summation tree is fixed, which keeps results bit-stable across builds.
inline double dot(const double* a, const double* b, int64_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0;
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
    s4 += a[i + 4] * b[i + 4];
    s5 += a[i + 5] * b[i + 5];
    s6 += a[i + 6] * b[i + 6];
    s7 += a[i + 7] * b[i + 7];
  }
  double tail = 0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return (((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7))) + tail;
}

// C[m x n] = A[m x k] * B[k x n], row-major. i-k-j order: the inner j loop
// streams both B and C rows, k accumulation stays in index order.
inline void mm_nn(double* c, const double* a, const double* b, int64_t m, int64_t k,
                  int64_t n, bool accumulate = false) {
  for (int64_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    if (!accumulate)
      for (int64_t j = 0; j < n; ++j) crow[j] = 0.0;
    const double* arow = a + i * k;
    for (int64_t kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      const double* brow = b + kk * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[m x n] = A[m x k] * B[n x k]^T. Row-against-row dot products.
inline void mm_nt(double* c, const double* a, const double* b, int64_t m, int64_t k,
                  int64_t n, bool accumulate = false) {
  for (int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (int64_t j = 0; j < n; ++j) {
      const double d = dot(arow, b + j * k, k);
      crow[j] = accumulate ? crow[j] + d : d;
    }
  }
}

// C[k x n] += A[m x k]^T * B[m x n]. Used by backward passes only.
inline void mm_tn_acc(double* c, const double* a, const double* b, int64_t m, int64_t k,
                      int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* brow = b + i * n;
    for (int64_t kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      double* crow = c + kk * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// In-place softmax over one row, max-subtracted.
inline void softmax_row(double* x, int64_t n) {
  double mx = x[0];
  for (int64_t j = 1; j < n; ++j)
    if (x[j] > mx) mx = x[j];
  double sum = 0.0;
  for (int64_t j = 0; j < n; ++j) {
    x[j] = std::exp(x[j] - mx);
    sum += x[j];
  }
  for (int64_t j = 0; j < n; ++j) x[j] /= sum;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + e^x) without overflow.
inline double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace sessrec::kernels
