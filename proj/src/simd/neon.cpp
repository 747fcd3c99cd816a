// AArch64 Advanced SIMD kernels (two doubles per register).

#include <arm_neon.h>

#include <cmath>

#include "tables.hpp"

namespace joco::simd::detail {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t s0 = vdupq_n_f64(0.0);
  float64x2_t s1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 = vfmaq_f64(s0, vld1q_f64(a + i), vld1q_f64(b + i));
    s1 = vfmaq_f64(s1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(s0, s1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(std::size_t n, double alpha, const double* x, double* y) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_n_f64(vld1q_f64(y + i), vld1q_f64(x + i), alpha));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nt_neon(std::size_t m, std::size_t n, std::size_t k, double alpha,
                  const double* a, std::size_t lda, const double* b,
                  std::size_t ldb, double* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * lda;
    double* ci = c + i * ldc;
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
      const double* b0 = b + j * ldb;
      const double* b1 = b0 + ldb;
      float64x2_t s0 = vdupq_n_f64(0.0);
      float64x2_t s1 = vdupq_n_f64(0.0);
      std::size_t p = 0;
      for (; p + 2 <= k; p += 2) {
        const float64x2_t x = vld1q_f64(ai + p);
        s0 = vfmaq_f64(s0, x, vld1q_f64(b0 + p));
        s1 = vfmaq_f64(s1, x, vld1q_f64(b1 + p));
      }
      double r0 = vaddvq_f64(s0);
      double r1 = vaddvq_f64(s1);
      for (; p < k; ++p) {
        r0 += ai[p] * b0[p];
        r1 += ai[p] * b1[p];
      }
      ci[j] += alpha * r0;
      ci[j + 1] += alpha * r1;
    }
    for (; j < n; ++j) ci[j] += alpha * dot_neon(ai, b + j * ldb, k);
  }
}

void exp_neon(std::size_t n, double* x) {
  for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(x[i]);
}

}  // namespace

const KernelTable kNeonTable{Isa::kNeon, "neon", dot_neon, axpy_neon,
                             gemm_nt_neon, exp_neon};

}  // namespace joco::simd::detail
