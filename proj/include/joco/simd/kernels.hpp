#pragma once

// Data-parallel inner loops used by the dense linear algebra. Every kernel has
// a portable scalar reference and, where the target supports it, a vector
// variant. The active table is picked once at startup from the running CPU;
// JOCO_SIMD=scalar (or avx2, neon) in the environment forces a choice.
//
// Variants agree to rounding, not bitwise: summation order differs. For
// bit-for-bit reproducibility across machines, force the scalar table.

#include <cstddef>
#include <string_view>

namespace joco::simd {

enum class Isa { kScalar, kAvx2, kNeon };

struct KernelTable {
  Isa isa;
  std::string_view name;

  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  /// y[i] += alpha * x[i]
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);

  /// C[i, j] += alpha * sum_k A[i, k] * B[j, k] for i < m, j < n.
  /// Row-major with leading dimensions lda, ldb, ldc.
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, double alpha,
                  const double* a, std::size_t lda, const double* b,
                  std::size_t ldb, double* c, std::size_t ldc);

  /// x[i] = exp(x[i]). Arguments below -708 may flush to zero.
  void (*exp_inplace)(std::size_t n, double* x);
};

const KernelTable& scalar_kernels();

/// Vector table for `isa` if compiled in and supported by this CPU, else null.
const KernelTable* kernels_for(Isa isa);

/// Best table for this CPU, honouring JOCO_SIMD.
Isa detect_isa();

/// Currently active table.
const KernelTable& active();

/// Switch the active table. Returns false (and changes nothing) when `isa` is
/// unavailable. Not thread-safe with respect to concurrent kernel calls.
bool set_active(Isa isa);

std::string_view isa_name(Isa isa);

}  // namespace joco::simd
