// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include <immintrin.h>

#include "tsseg/simd/kernels.hpp"

namespace tsseg::simd {
namespace {

// Accumulates a row block of up to 16 output columns in registers while
// streaming over the reduction dimension.
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  const std::size_t n16 = n - n % 16;
  const std::size_t n4 = n - n % 4;
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * lda;
    double* crow = c + i * ldc;
    std::size_t j = 0;
    for (; j < n16; j += 16) {
      __m256d c0 = _mm256_loadu_pd(crow + j);
      __m256d c1 = _mm256_loadu_pd(crow + j + 4);
      __m256d c2 = _mm256_loadu_pd(crow + j + 8);
      __m256d c3 = _mm256_loadu_pd(crow + j + 12);
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d av = _mm256_broadcast_sd(arow + p);
        const double* brow = b + p * ldb + j;
        c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow), c0);
        c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 4), c1);
        c2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 8), c2);
        c3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 12), c3);
      }
      _mm256_storeu_pd(crow + j, c0);
      _mm256_storeu_pd(crow + j + 4, c1);
      _mm256_storeu_pd(crow + j + 8, c2);
      _mm256_storeu_pd(crow + j + 12, c3);
    }
    for (; j < n4; j += 4) {
      __m256d c0 = _mm256_loadu_pd(crow + j);
      for (std::size_t p = 0; p < k; ++p) {
        c0 = _mm256_fmadd_pd(_mm256_broadcast_sd(arow + p), _mm256_loadu_pd(b + p * ldb + j), c0);
      }
      _mm256_storeu_pd(crow + j, c0);
    }
    for (; j < n; ++j) {
      double acc = crow[j];
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * b[p * ldb + j];
      crow[j] = acc;
    }
  }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  const std::size_t n16 = n - n % 16;
  const std::size_t n4 = n - n % 4;
  for (std::size_t p = 0; p < k; ++p) {
    double* crow = c + p * ldc;
    std::size_t j = 0;
    for (; j < n16; j += 16) {
      __m256d c0 = _mm256_loadu_pd(crow + j);
      __m256d c1 = _mm256_loadu_pd(crow + j + 4);
      __m256d c2 = _mm256_loadu_pd(crow + j + 8);
      __m256d c3 = _mm256_loadu_pd(crow + j + 12);
      for (std::size_t i = 0; i < m; ++i) {
        const __m256d av = _mm256_broadcast_sd(a + i * lda + p);
        const double* brow = b + i * ldb + j;
        c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow), c0);
        c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 4), c1);
        c2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 8), c2);
        c3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 12), c3);
      }
      _mm256_storeu_pd(crow + j, c0);
      _mm256_storeu_pd(crow + j + 4, c1);
      _mm256_storeu_pd(crow + j + 8, c2);
      _mm256_storeu_pd(crow + j + 12, c3);
    }
    for (; j < n4; j += 4) {
      __m256d c0 = _mm256_loadu_pd(crow + j);
      for (std::size_t i = 0; i < m; ++i) {
        c0 = _mm256_fmadd_pd(_mm256_broadcast_sd(a + i * lda + p), _mm256_loadu_pd(b + i * ldb + j),
                             c0);
      }
      _mm256_storeu_pd(crow + j, c0);
    }
    for (; j < n; ++j) {
      double acc = crow[j];
      for (std::size_t i = 0; i < m; ++i) acc += a[i * lda + p] * b[i * ldb + j];
      crow[j] = acc;
    }
  }
}

void axpby(std::size_t n, double alpha, const double* x, double beta, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d yb = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), yb));
  }
  for (; i < n; ++i) y[i] = alpha * x[i] + beta * y[i];
}

void colsum(std::size_t m, std::size_t n, const double* a, std::size_t lda, double* out) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d acc = _mm256_loadu_pd(out + j);
    for (std::size_t i = 0; i < m; ++i) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i * lda + j));
    _mm256_storeu_pd(out + j, acc);
  }
  for (; j < n; ++j) {
    double acc = out[j];
    for (std::size_t i = 0; i < m; ++i) acc += a[i * lda + j];
    out[j] = acc;
  }
}

}  // namespace

KernelSet avx2_kernel_table() { return KernelSet{"avx2", gemm_nn, gemm_tn, axpby, colsum}; }

}  // namespace tsseg::simd
