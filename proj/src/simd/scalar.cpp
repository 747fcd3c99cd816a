// Reference kernels. Built with -ffp-contract=off so no FMA contraction sneaks
// in; results depend only on IEEE double arithmetic and libm's exp.

#include <cmath>

#include "tables.hpp"

namespace joco::simd::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nt_scalar(std::size_t m, std::size_t n, std::size_t k, double alpha,
                    const double* a, std::size_t lda, const double* b,
                    std::size_t ldb, double* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * lda;
    double* ci = c + i * ldc;
    for (std::size_t j = 0; j < n; ++j) {
      ci[j] += alpha * dot_scalar(ai, b + j * ldb, k);
    }
  }
}

void exp_scalar(std::size_t n, double* x) {
  for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(x[i]);
}

}  // namespace

const KernelTable kScalarTable{Isa::kScalar, "scalar", dot_scalar, axpy_scalar,
                               gemm_nt_scalar, exp_scalar};

}  // namespace joco::simd::detail
