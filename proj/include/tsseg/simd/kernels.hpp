#pragma once

// Dense f64 kernels behind the temporal convolutions, EMA blend and Adam.
// Each kernel has a scalar reference and (on x86-64) an AVX2+FMA variant;
// the active table is chosen once at startup from CPUID, overridable with
// TSSEG_SIMD=scalar|avx2.

#include <cstddef>
#include <optional>
#include <string_view>

namespace tsseg::simd {

/// C[m×n] += A[m×k] · B[k×n]. Leading dimensions are row strides.
using GemmNN = void (*)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                        std::size_t lda, const double* b, std::size_t ldb, double* c,
                        std::size_t ldc);

/// C[k×n] += Aᵀ · B with A[m×k], B[m×n] (weight gradients, reduction over m).
using GemmTN = void (*)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                        std::size_t lda, const double* b, std::size_t ldb, double* c,
                        std::size_t ldc);

/// y = alpha·x + beta·y
using Axpby = void (*)(std::size_t n, double alpha, const double* x, double beta, double* y);

/// out[j] += Σ_i a[i·lda + j] for i < m (column sums, bias gradients)
using ColSum = void (*)(std::size_t m, std::size_t n, const double* a, std::size_t lda,
                        double* out);

struct KernelSet {
  std::string_view name;
  GemmNN gemm_nn;
  GemmTN gemm_tn;
  Axpby axpby;
  ColSum colsum;
};

const KernelSet& scalar_kernels();
/// Empty when the build or the CPU lacks AVX2/FMA.
std::optional<KernelSet> avx2_kernels();

/// The kernel table used by the library.
const KernelSet& active();

}  // namespace tsseg::simd
