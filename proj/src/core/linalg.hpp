#pragma once

#include <cstdint>

#include "core/types.hpp"

namespace sdl {

// Largest eigenvalue of the symmetric PSD matrix M by power iteration.
// Runs `iters` rounds or stops when the Rayleigh quotient settles to
// rel_tol; start vector is a fixed deterministic unit vector.
double spectral_norm_sym(const Matrix& M, int iters = 50,
                         double rel_tol = 1e-10);

// ||X||_2^2, the squared spectral norm, via power iteration on the smaller
// Gram matrix.
double spectral_norm_sq(const Matrix& X, int iters = 50,
                        double rel_tol = 1e-10);

// Solves X * (S + ridge I) = B for X, with S symmetric PSD (normal
// equations of the ridge updates). Throws NumericError if the Cholesky
// factorization fails, reporting the diagonal range.
Matrix solve_ridge_rhs(const Matrix& S, double ridge, const Matrix& B);

// Normalizes every column of D to unit l2 norm in place. A column with
// norm < 1e-12 is replaced by a deterministic unit vector drawn from a
// stream keyed on (salt, column index); repeated calls with the same salt
// reproduce the same replacement, so dead atoms do not wander.
void normalize_columns(Matrix& D, std::uint64_t salt);

inline bool has_unit_columns(const Matrix& D, double tol = 1e-8) {
  for (Eigen::Index j = 0; j < D.cols(); ++j)
    if (std::abs(D.col(j).norm() - 1.0) > tol) return false;
  return true;
}

}  // namespace sdl
