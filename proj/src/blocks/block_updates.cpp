#include "blocks/block_updates.hpp"

#include "core/linalg.hpp"
#include "core/objective.hpp"

namespace sdl {

Matrix update_dictionary_closed(const Matrix& Y, const Matrix& G, double eps_D,
                                std::uint64_t salt) {
  if (!(eps_D > 0.0))
    throw ConfigError("update_dictionary_closed: eps_D must be > 0");
  require(Y.cols() == G.cols(), "update_dictionary_closed: Y cols != G cols");
  require_finite(Y, "Y");
  require_finite(G, "G");
  Matrix D = solve_ridge_rhs(G * G.transpose(), eps_D, Y * G.transpose());
  normalize_columns(D, salt);
  return D;
}

Matrix update_dictionary_pgd(const Matrix& D, const Matrix& Y, const Matrix& G,
                             double eps_D, std::uint64_t salt) {
  require(D.rows() == Y.rows() && D.cols() == G.rows() && Y.cols() == G.cols(),
          "update_dictionary_pgd: shape mismatch");
  require_finite(D, "D");
  const double L_D = lipschitz_D(G, eps_D);
  Matrix next = D - grad_D(D, Y, G, eps_D) / L_D;
  normalize_columns(next, salt);
  return next;
}

Matrix update_lc_matrix(const Matrix& G, const Matrix& Q, double alpha,
                        double mu_A) {
  if (!(alpha > 0.0) || !(mu_A > 0.0))
    throw ConfigError("update_lc_matrix: alpha and mu_A must be > 0");
  require(G.cols() == Q.cols(), "update_lc_matrix: G cols != Q cols");
  require_finite(G, "G");
  return solve_ridge_rhs(G * G.transpose(), mu_A / alpha, Q * G.transpose());
}

Matrix update_classifier(const Matrix& G, const Matrix& H, double beta,
                         double rho_W) {
  if (!(beta > 0.0) || !(rho_W > 0.0))
    throw ConfigError("update_classifier: beta and rho_W must be > 0");
  require(G.cols() == H.cols(), "update_classifier: G cols != H cols");
  require_finite(G, "G");
  return solve_ridge_rhs(G * G.transpose(), rho_W / beta, H * G.transpose());
}

}  // namespace sdl
