#pragma once

#include <cstddef>
#include <span>

#include "joco/numgrad/tensor.hpp"

namespace joco::ng {

struct CholeskyResult {
  Tensor lower;
  double jitter = 0.0;  // added to the diagonal before factorizing
};

/// Blocked in-place Cholesky of the lower triangle of a row-major n x n
/// matrix. Returns false on a non-positive or non-finite pivot, leaving the
/// buffer partially overwritten. The strict upper triangle is zeroed on
/// success.
bool cholesky_in_place(std::span<double> a, std::size_t n);

/// Cholesky with jitter escalation: no jitter first, then
/// 1e-6, 1e-5, ..., 1e-2 times the mean diagonal. Throws NumericalError
/// "not positive definite" when every attempt fails, ShapeError when `a` is
/// not square or not symmetric to 1e-8 * (1 + max|a|).
CholeskyResult cholesky(const Tensor& a);

/// a (n x k) times b (k x m), or a (n x k) times vector b (k).
Tensor matmul(const Tensor& a, const Tensor& b);

/// a (n x k) times transpose(b) where b is (m x k).
Tensor matmul_nt(const Tensor& a, const Tensor& b);

/// Row-wise triangular solves against lower-triangular `l` (n x n). Each row x
/// of `rhs` (q x n, or a single vector of length n) is replaced by the
/// solution of l * x = row (forward) or transpose(l) * x = row (backward).
void forward_subst_rows(const Tensor& l, Tensor& rhs);
void backward_subst_rows(const Tensor& l, Tensor& rhs);

/// Column-oriented solves: returns X with l * X = b (b is n or n x r).
Tensor solve_lower(const Tensor& l, const Tensor& b);
/// Returns X with transpose(l) * X = b.
Tensor solve_lower_transposed(const Tensor& l, const Tensor& b);

/// c -= w * transpose(w) on a symmetric q x q matrix (w is q x n). Only the
/// lower triangle is computed; the upper is mirrored from it.
void syrk_sub(Tensor& c, const Tensor& w);

/// Mirror the lower triangle onto the upper.
void symmetrize_from_lower(Tensor& m);

}  // namespace joco::ng
