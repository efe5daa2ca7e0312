#include <cstdlib>
#include <string>

#include "tsseg/simd/kernels.hpp"

namespace tsseg::simd {

#if defined(TSSEG_BUILD_AVX2)
KernelSet avx2_kernel_table();
#endif

std::optional<KernelSet> avx2_kernels() {
#if defined(TSSEG_BUILD_AVX2)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return avx2_kernel_table();
#endif
  return std::nullopt;
}

namespace {

KernelSet select() {
  const char* env = std::getenv("TSSEG_SIMD");
  const std::string want = env ? env : "";
  if (want == "scalar") return scalar_kernels();
  if (auto avx = avx2_kernels()) return *avx;
  return scalar_kernels();
}

}  // namespace

const KernelSet& active() {
  static const KernelSet set = select();
  return set;
}

}  // namespace tsseg::simd
