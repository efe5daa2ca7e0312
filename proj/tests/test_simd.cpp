// Scalar reference vs. AVX2 kernels on shapes that hit every tail path.

#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "tsseg/simd/kernels.hpp"

using namespace tsseg;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

double max_rel(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(a[i])));
  }
  return m;
}

constexpr std::size_t kShapes[][3] = {{1, 1, 1},   {3, 5, 2},   {7, 16, 8},  {20, 32, 32},
                                      {33, 37, 9}, {64, 4, 16}, {5, 19, 31}, {430, 32, 32}};

}  // namespace

TEST_CASE("scalar gemm_nn matches a naive triple loop") {
  std::mt19937_64 rng(1);
  const std::size_t m = 6, n = 5, k = 4;
  auto a = random_vec(rng, m * k), b = random_vec(rng, k * n), c = random_vec(rng, m * n);
  auto expect = c;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p) expect[i * n + j] += a[i * k + p] * b[p * n + j];
  simd::scalar_kernels().gemm_nn(m, n, k, a.data(), k, b.data(), n, c.data(), n);
  CHECK(max_rel(c, expect) < 1e-14);
}

TEST_CASE("avx2 kernels agree with scalar kernels") {
  const auto avx = simd::avx2_kernels();
  if (!avx) {
    MESSAGE("AVX2 unavailable; equivalence not exercised");
    return;
  }
  const auto& ref = simd::scalar_kernels();
  std::mt19937_64 rng(2);
  for (const auto& s : kShapes) {
    const std::size_t m = s[0], n = s[1], k = s[2];
    CAPTURE(m);
    CAPTURE(n);
    CAPTURE(k);
    // padded leading dimensions exercise the stride arguments
    const std::size_t lda = k + 1, ldb = n + 2, ldc = n + 3;
    auto a = random_vec(rng, m * lda), b = random_vec(rng, k * ldb), c0 = random_vec(rng, m * ldc);
    auto c1 = c0;
    ref.gemm_nn(m, n, k, a.data(), lda, b.data(), ldb, c0.data(), ldc);
    avx->gemm_nn(m, n, k, a.data(), lda, b.data(), ldb, c1.data(), ldc);
    CHECK(max_rel(c0, c1) < 1e-12);

    // gemm_tn: A is m×k, B is m×n, C is k×n
    auto bt = random_vec(rng, m * ldb), ct0 = random_vec(rng, k * ldc);
    auto ct1 = ct0;
    ref.gemm_tn(m, n, k, a.data(), lda, bt.data(), ldb, ct0.data(), ldc);
    avx->gemm_tn(m, n, k, a.data(), lda, bt.data(), ldb, ct1.data(), ldc);
    CHECK(max_rel(ct0, ct1) < 1e-12);

    auto x = random_vec(rng, m * n), y0 = random_vec(rng, m * n);
    auto y1 = y0;
    ref.axpby(x.size(), 0.3, x.data(), 0.7, y0.data());
    avx->axpby(x.size(), 0.3, x.data(), 0.7, y1.data());
    CHECK(max_rel(y0, y1) < 1e-15);

    std::vector<double> s0(n, 1.0), s1(n, 1.0);
    ref.colsum(m, n, c0.data(), ldc, s0.data());
    avx->colsum(m, n, c0.data(), ldc, s1.data());
    CHECK(max_rel(s0, s1) < 1e-12);
  }
}

TEST_CASE("axpby with (1, 0) copies exactly") {
  std::mt19937_64 rng(5);
  auto x = random_vec(rng, 37), y = random_vec(rng, 37);
  simd::active().axpby(x.size(), 1.0, x.data(), 0.0, y.data());
  CHECK(x == y);
}

TEST_CASE("active kernel table is one of the known variants") {
  const auto name = simd::active().name;
  CHECK((name == "scalar" || name == "avx2"));
}
