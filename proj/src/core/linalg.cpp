#include "core/linalg.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "core/rng.hpp"

namespace sdl {

double spectral_norm_sym(const Matrix& M, int iters, double rel_tol) {
  const Eigen::Index n = M.rows();
  if (n == 0) return 0.0;
  require(M.rows() == M.cols(), "spectral_norm_sym: matrix must be square");

  // Fixed seeded start vector; a deterministic generic direction avoids
  // landing in an eigenspace orthogonal to the dominant one.
  Rng rng(0x5eedULL);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.gaussian();
  double nv = v.norm();
  if (nv == 0.0) v.setOnes(), nv = v.norm();
  v /= nv;

  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vector w = M * v;
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;  // v in the null space and M v = 0
    v = w / nw;
    const double next = v.dot(M * v);
    if (std::abs(next - lambda) <= rel_tol * std::max(1.0, std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::max(lambda, 0.0);
}

double spectral_norm_sq(const Matrix& X, int iters, double rel_tol) {
  if (X.size() == 0) return 0.0;
  if (X.rows() <= X.cols())
    return spectral_norm_sym(X * X.transpose(), iters, rel_tol);
  return spectral_norm_sym(X.transpose() * X, iters, rel_tol);
}

Matrix solve_ridge_rhs(const Matrix& S, double ridge, const Matrix& B) {
  require(S.rows() == S.cols(), "solve_ridge_rhs: S must be square");
  require(B.cols() == S.rows(), "solve_ridge_rhs: shape mismatch");
  Matrix M = S;
  M.diagonal().array() += ridge;
  Eigen::LLT<Matrix> llt(M);
  if (llt.info() != Eigen::Success) {
    throw NumericError(
        "ridge system is numerically singular despite regularization "
        "(diag range [" +
        std::to_string(M.diagonal().minCoeff()) + ", " +
        std::to_string(M.diagonal().maxCoeff()) + "], ridge " +
        std::to_string(ridge) + ")");
  }
  // X M = B  <=>  M X^T = B^T (M symmetric)
  return llt.solve(B.transpose()).transpose();
}

void normalize_columns(Matrix& D, std::uint64_t salt) {
  for (Eigen::Index j = 0; j < D.cols(); ++j) {
    const double n = D.col(j).norm();
    if (n < 1e-12) {
      Rng rng(mix64(salt) ^ mix64(static_cast<std::uint64_t>(j) + 1));
      Vector v(D.rows());
      for (Eigen::Index i = 0; i < D.rows(); ++i) v[i] = rng.gaussian();
      D.col(j) = v / v.norm();
    } else {
      D.col(j) /= n;
    }
  }
}

}  // namespace sdl
