// AVX2 + FMA kernels. This translation unit is the only one compiled with
// -mavx2 -mfma; nothing here may be called unless dispatch confirmed support.

#include <immintrin.h>

#include <algorithm>
#include <cstdint>
#include <vector>

#include "tables.hpp"

namespace joco::simd::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4),
                         s1);
  }
  if (i + 4 <= n) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    i += 4;
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Packed GEMM: B is packed into 8-wide column panels and A into 6-row
// panels so the 6x8 micro-kernel streams both from contiguous memory.
constexpr std::size_t kMr = 6;
constexpr std::size_t kNr = 8;
constexpr std::size_t kKc = 256;
constexpr std::size_t kMc = 96;

struct PackBuffers {
  std::vector<double> a, b;
};

PackBuffers& pack_buffers() {
  thread_local PackBuffers buf;
  return buf;
}

// Rows [j0, j0 + nc) of B, columns [p0, p0 + kc), into panels of kNr rows laid
// out k-major; short panels are zero padded.
void pack_b(const double* b, std::size_t ldb, std::size_t nc, std::size_t kc,
            double* out) {
  for (std::size_t j = 0; j < nc; j += kNr) {
    const std::size_t w = std::min(kNr, nc - j);
    for (std::size_t p = 0; p < kc; ++p) {
      std::size_t r = 0;
      for (; r < w; ++r) out[r] = b[(j + r) * ldb + p];
      for (; r < kNr; ++r) out[r] = 0.0;
      out += kNr;
    }
  }
}

void pack_a(const double* a, std::size_t lda, std::size_t mc, std::size_t kc,
            double* out) {
  for (std::size_t i = 0; i < mc; i += kMr) {
    const std::size_t h = std::min(kMr, mc - i);
    for (std::size_t p = 0; p < kc; ++p) {
      std::size_t r = 0;
      for (; r < h; ++r) out[r] = a[(i + r) * lda + p];
      for (; r < kMr; ++r) out[r] = 0.0;
      out += kMr;
    }
  }
}

// C[0:h, 0:w] += alpha * Ap * Bp^T over kc steps.
inline void micro_6x8(std::size_t kc, double alpha, const double* ap,
                      const double* bp, double* c, std::size_t ldc,
                      std::size_t h, std::size_t w) {
  __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
  __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
  __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
  __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
  __m256d c40 = _mm256_setzero_pd(), c41 = _mm256_setzero_pd();
  __m256d c50 = _mm256_setzero_pd(), c51 = _mm256_setzero_pd();
  for (std::size_t p = 0; p < kc; ++p) {
    const __m256d b0 = _mm256_load_pd(bp);
    const __m256d b1 = _mm256_load_pd(bp + 4);
    __m256d x = _mm256_broadcast_sd(ap);
    c00 = _mm256_fmadd_pd(x, b0, c00);
    c01 = _mm256_fmadd_pd(x, b1, c01);
    x = _mm256_broadcast_sd(ap + 1);
    c10 = _mm256_fmadd_pd(x, b0, c10);
    c11 = _mm256_fmadd_pd(x, b1, c11);
    x = _mm256_broadcast_sd(ap + 2);
    c20 = _mm256_fmadd_pd(x, b0, c20);
    c21 = _mm256_fmadd_pd(x, b1, c21);
    x = _mm256_broadcast_sd(ap + 3);
    c30 = _mm256_fmadd_pd(x, b0, c30);
    c31 = _mm256_fmadd_pd(x, b1, c31);
    x = _mm256_broadcast_sd(ap + 4);
    c40 = _mm256_fmadd_pd(x, b0, c40);
    c41 = _mm256_fmadd_pd(x, b1, c41);
    x = _mm256_broadcast_sd(ap + 5);
    c50 = _mm256_fmadd_pd(x, b0, c50);
    c51 = _mm256_fmadd_pd(x, b1, c51);
    ap += kMr;
    bp += kNr;
  }
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d acc[kMr][2] = {{c00, c01}, {c10, c11}, {c20, c21},
                               {c30, c31}, {c40, c41}, {c50, c51}};
  if (h == kMr && w == kNr) {
    for (std::size_t r = 0; r < kMr; ++r) {
      double* cr = c + r * ldc;
      _mm256_storeu_pd(cr, _mm256_fmadd_pd(va, acc[r][0], _mm256_loadu_pd(cr)));
      _mm256_storeu_pd(cr + 4,
                       _mm256_fmadd_pd(va, acc[r][1], _mm256_loadu_pd(cr + 4)));
    }
    return;
  }
  alignas(32) double tmp[kNr];
  for (std::size_t r = 0; r < h; ++r) {
    _mm256_store_pd(tmp, _mm256_mul_pd(va, acc[r][0]));
    _mm256_store_pd(tmp + 4, _mm256_mul_pd(va, acc[r][1]));
    double* cr = c + r * ldc;
    for (std::size_t j = 0; j < w; ++j) cr[j] += tmp[j];
  }
}

void gemm_nt_avx2(std::size_t m, std::size_t n, std::size_t k, double alpha,
                  const double* a, std::size_t lda, const double* b,
                  std::size_t ldb, double* c, std::size_t ldc) {
  if (m == 0 || n == 0 || k == 0) return;
  PackBuffers& buf = pack_buffers();
  const std::size_t n_pad = (n + kNr - 1) / kNr * kNr;
  const std::size_t kc_max = std::min(k, kKc);
  buf.b.resize(n_pad * kc_max + 4);
  buf.a.resize(kMc * kc_max + 4);
  // 32-byte aligned views into the buffers.
  auto align = [](double* p) {
    return reinterpret_cast<double*>((reinterpret_cast<std::uintptr_t>(p) + 31) &
                                     ~std::uintptr_t{31});
  };
  double* bp = align(buf.b.data());
  double* ap = align(buf.a.data());
  for (std::size_t p0 = 0; p0 < k; p0 += kKc) {
    const std::size_t kc = std::min(kKc, k - p0);
    pack_b(b + p0, ldb, n, kc, bp);
    for (std::size_t i0 = 0; i0 < m; i0 += kMc) {
      const std::size_t mc = std::min(kMc, m - i0);
      pack_a(a + i0 * lda + p0, lda, mc, kc, ap);
      for (std::size_t j = 0; j < n; j += kNr) {
        const std::size_t w = std::min(kNr, n - j);
        const double* bpanel = bp + (j / kNr) * kNr * kc;
        for (std::size_t i = 0; i < mc; i += kMr) {
          const std::size_t h = std::min(kMr, mc - i);
          micro_6x8(kc, alpha, ap + (i / kMr) * kMr * kc, bpanel,
                    c + (i0 + i) * ldc + j, ldc, h, w);
        }
      }
    }
  }
}

// exp via Cody-Waite reduction x = n ln2 + r, |r| <= ln2/2, then a degree-13
// Taylor polynomial in r (truncation below 1e-17 relative).
inline __m256d exp4(__m256d x) {
  const __m256d lo_cut = _mm256_set1_pd(-708.0);
  const __m256d hi_cut = _mm256_set1_pd(709.0);
  const __m256d underflow = _mm256_cmp_pd(x, lo_cut, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lo_cut), hi_cut);

  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  static constexpr double kInvFact[] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0,
      1.0 / 3628800.0,    1.0 / 362880.0,    1.0 / 40320.0,
      1.0 / 5040.0,       1.0 / 720.0,       1.0 / 120.0,
      1.0 / 24.0,         1.0 / 6.0,         0.5,
      1.0,                1.0};
  __m256d p = _mm256_set1_pd(kInvFact[0]);
  for (int i = 1; i < 14; ++i) {
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFact[i]));
  }

  // 2^n: place n + 1023 in the exponent field via the 2^52 + 2^51 trick.
  const __m256d magic = _mm256_set1_pd(6755399441055744.0 + 1023.0);
  const __m256i bits = _mm256_castpd_si256(_mm256_add_pd(n, magic));
  const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(bits, 52));
  const __m256d result = _mm256_mul_pd(p, scale);
  return _mm256_andnot_pd(underflow, result);
}

void exp_avx2(std::size_t n, double* x) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, exp4(_mm256_loadu_pd(x + i)));
  }
  if (i < n) {
    alignas(32) double tail[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t t = 0; t < n - i; ++t) tail[t] = x[i + t];
    _mm256_store_pd(tail, exp4(_mm256_load_pd(tail)));
    for (std::size_t t = 0; t < n - i; ++t) x[i + t] = tail[t];
  }
}

}  // namespace

const KernelTable kAvx2Table{Isa::kAvx2, "avx2", dot_avx2, axpy_avx2,
                             gemm_nt_avx2, exp_avx2};

}  // namespace joco::simd::detail
