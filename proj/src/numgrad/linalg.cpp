#include "joco/numgrad/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "joco/simd/kernels.hpp"
#include "joco/util/error.hpp"

namespace joco::ng {
namespace {

constexpr std::size_t kLeaf = 16;
constexpr std::size_t kTile = 96;
constexpr std::size_t kBlock = 32;

// Split point for the recursion, kept on a multiple of 8 when possible.
std::size_t split(std::size_t n) {
  const std::size_t h = n / 2;
  return h >= 8 ? h / 8 * 8 : h;
}

// X <- X L^-T for an n x n lower-triangular L, i.e. each row x of X is
// replaced by the solution of L z = x.
void trsm_rows(const simd::KernelTable& k, const double* l, std::size_t ldl,
               std::size_t n, double* x, std::size_t ldx, std::size_t rows) {
  if (n <= kLeaf) {
    for (std::size_t r = 0; r < rows; ++r) {
      double* xr = x + r * ldx;
      for (std::size_t j = 0; j < n; ++j) {
        xr[j] = (xr[j] - k.dot(l + j * ldl, xr, j)) / l[j * ldl + j];
      }
    }
    return;
  }
  const std::size_t h = split(n);
  trsm_rows(k, l, ldl, h, x, ldx, rows);
  k.gemm_nt(rows, n - h, h, -1.0, x, ldx, l + h * ldl, ldl, x + h, ldx);
  trsm_rows(k, l + h * ldl + h, ldl, n - h, x + h, ldx, rows);
}

// C <- C - A A^T on the lower triangle; diagonal tiles also touch a few upper
// entries, which are never read.
void syrk_lower(const simd::KernelTable& k, std::size_t n, std::size_t inner,
                const double* a, std::size_t lda, double* c, std::size_t ldc) {
  if (inner == 0) return;
  for (std::size_t ib = 0; ib < n; ib += kTile) {
    const std::size_t ie = std::min(n, ib + kTile);
    k.gemm_nt(ie - ib, ie, inner, -1.0, a + ib * lda, lda, a, lda, c + ib * ldc,
              ldc);
  }
}

bool chol_rec(const simd::KernelTable& k, double* a, std::size_t lda,
              std::size_t n) {
  if (n <= kLeaf) {
    for (std::size_t j = 0; j < n; ++j) {
      const double* rj = a + j * lda;
      const double pivot = rj[j] - k.dot(rj, rj, j);
      if (!(pivot > 0.0) || !std::isfinite(pivot)) return false;
      const double djj = std::sqrt(pivot);
      a[j * lda + j] = djj;
      for (std::size_t i = j + 1; i < n; ++i) {
        double* ri = a + i * lda;
        ri[j] = (ri[j] - k.dot(ri, rj, j)) / djj;
      }
    }
    return true;
  }
  const std::size_t h = split(n);
  if (!chol_rec(k, a, lda, h)) return false;
  double* a21 = a + h * lda;
  trsm_rows(k, a, lda, h, a21, lda, n - h);
  syrk_lower(k, n - h, h, a21, lda, a21 + h, lda);
  return chol_rec(k, a21 + h, lda, n - h);
}

void require_square(const Tensor& a, const char* what) {
  if (!a.is_matrix() || a.rows() != a.cols()) {
    throw ShapeError(std::string(what) + ": expected a square matrix, got " +
                     shape_string(a.shape()));
  }
}

// Tile-wise comparison of the lower and upper triangles.
bool symmetric(const Tensor& a, double tol) {
  const std::size_t n = a.rows();
  const double* v = a.values().data();
  for (std::size_t ib = 0; ib < n; ib += kBlock)
    for (std::size_t jb = 0; jb <= ib; jb += kBlock)
      for (std::size_t i = ib; i < std::min(n, ib + kBlock); ++i)
        for (std::size_t j = jb; j < std::min(i, jb + kBlock); ++j)
          if (std::abs(v[i * n + j] - v[j * n + i]) > tol) return false;
  return true;
}

}  // namespace

bool cholesky_in_place(std::span<double> a, std::size_t n) {
  if (!chol_rec(simd::active(), a.data(), n, n)) return false;
  for (std::size_t i = 0; i < n; ++i)
    std::fill(a.begin() + i * n + i + 1, a.begin() + (i + 1) * n, 0.0);
  return true;
}

CholeskyResult cholesky(const Tensor& a) {
  require_square(a, "cholesky");
  const std::size_t n = a.rows();
  if (!symmetric(a, 1e-8 * (1.0 + a.max_abs()))) {
    throw ShapeError("cholesky: matrix is not symmetric");
  }

  CholeskyResult out{a, 0.0};
  if (cholesky_in_place(out.lower.values(), n)) return out;

  double mean_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean_diag += a(i, i);
  mean_diag /= static_cast<double>(n);
  if (mean_diag > 0.0 && std::isfinite(mean_diag)) {
    static constexpr double kScales[] = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2};
    for (double s : kScales) {
      const double jitter = s * mean_diag;
      out.lower = a;
      for (std::size_t i = 0; i < n; ++i) out.lower(i, i) += jitter;
      if (cholesky_in_place(out.lower.values(), n)) {
        out.jitter = jitter;
        return out;
      }
    }
  }
  throw NumericalError("not positive definite");
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (!a.is_matrix() || !(b.is_matrix() || b.is_vector()) ||
      a.cols() != b.rows()) {
    throw ShapeError("matmul: incompatible shapes " + shape_string(a.shape()) +
                     " and " + shape_string(b.shape()));
  }
  const auto& k = simd::active();
  const std::size_t n = a.rows(), inner = a.cols();
  if (b.is_vector()) {
    Tensor out(Shape{n});
    for (std::size_t i = 0; i < n; ++i) out[i] = k.dot(a.row(i), b.values().data(), inner);
    return out;
  }
  const std::size_t m = b.cols();
  const Tensor bt = transpose(b);
  Tensor out(Shape{n, m});
  if (inner > 0) {
    k.gemm_nt(n, m, inner, 1.0, a.values().data(), inner, bt.values().data(),
              inner, out.values().data(), m);
  }
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (!a.is_matrix() || !b.is_matrix() || a.cols() != b.cols()) {
    throw ShapeError("matmul_nt: incompatible shapes " +
                     shape_string(a.shape()) + " and " + shape_string(b.shape()));
  }
  const std::size_t n = a.rows(), m = b.rows(), inner = a.cols();
  Tensor out(Shape{n, m});
  if (inner > 0) {
    simd::active().gemm_nt(n, m, inner, 1.0, a.values().data(), inner,
                           b.values().data(), inner, out.values().data(), m);
  }
  return out;
}

void forward_subst_rows(const Tensor& l, Tensor& rhs) {
  require_square(l, "forward_subst_rows");
  const std::size_t n = l.rows();
  if (rhs.cols() != n && !(rhs.is_vector() && rhs.size() == n)) {
    throw ShapeError("forward_subst_rows: right-hand side width mismatch");
  }
  const std::size_t q = rhs.is_vector() ? 1 : rhs.rows();
  trsm_rows(simd::active(), l.values().data(), n, n, rhs.values().data(), n, q);
}

void backward_subst_rows(const Tensor& l, Tensor& rhs) {
  require_square(l, "backward_subst_rows");
  const std::size_t n = l.rows();
  if (rhs.cols() != n && !(rhs.is_vector() && rhs.size() == n)) {
    throw ShapeError("backward_subst_rows: right-hand side width mismatch");
  }
  const std::size_t q = rhs.is_vector() ? 1 : rhs.rows();
  const auto& k = simd::active();
  for (std::size_t r = 0; r < q; ++r) {
    double* x = rhs.values().data() + r * n;
    for (std::size_t j = n; j-- > 0;) {
      x[j] /= l(j, j);
      k.axpy(j, -x[j], l.row(j), x);
    }
  }
}

Tensor solve_lower(const Tensor& l, const Tensor& b) {
  if (b.is_vector()) {
    Tensor x = b;
    forward_subst_rows(l, x);
    return x;
  }
  Tensor xt = transpose(b);
  forward_subst_rows(l, xt);
  return transpose(xt);
}

Tensor solve_lower_transposed(const Tensor& l, const Tensor& b) {
  if (b.is_vector()) {
    Tensor x = b;
    backward_subst_rows(l, x);
    return x;
  }
  Tensor xt = transpose(b);
  backward_subst_rows(l, xt);
  return transpose(xt);
}

void syrk_sub(Tensor& c, const Tensor& w) {
  require_square(c, "syrk_sub");
  const std::size_t q = c.rows();
  if (!w.is_matrix() || w.rows() != q) {
    throw ShapeError("syrk_sub: factor row count mismatch");
  }
  syrk_lower(simd::active(), q, w.cols(), w.values().data(), w.cols(),
             c.values().data(), q);
  symmetrize_from_lower(c);
}

void symmetrize_from_lower(Tensor& m) {
  const std::size_t n = m.rows();
  double* v = m.values().data();
  for (std::size_t ib = 0; ib < n; ib += kBlock)
    for (std::size_t jb = ib; jb < n; jb += kBlock)
      for (std::size_t i = ib; i < std::min(n, ib + kBlock); ++i)
        for (std::size_t j = std::max(jb, i + 1); j < std::min(n, jb + kBlock); ++j)
          v[i * n + j] = v[j * n + i];
}

}  // namespace joco::ng
