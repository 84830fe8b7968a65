#include "core/objective.hpp"

#include <limits>

#include "core/linalg.hpp"

namespace sdl {

namespace {

void check_shapes(const ModelState& s, const Matrix& Y, const Matrix& G,
                  const SupervisionTargets& t) {
  require(Y.rows() == s.D.rows(), "objective: Y rows != D rows");
  require(G.rows() == s.D.cols(), "objective: G rows != D cols");
  require(G.cols() == Y.cols(), "objective: G cols != Y cols");
  require(t.Q.rows() == s.A.rows() && t.Q.cols() == Y.cols(),
          "objective: Q shape mismatch");
  require(t.H.rows() == s.W.rows() && t.H.cols() == Y.cols(),
          "objective: H shape mismatch");
  require(s.A.cols() == G.rows() && s.W.cols() == G.rows(),
          "objective: A/W cols != K");
  require_finite(Y, "Y");
  require_finite(G, "G");
}

}  // namespace

double objective_topk(const ModelState& state, const Matrix& Y,
                      const Matrix& G, const SupervisionTargets& targets,
                      double alpha, double beta) {
  check_shapes(state, Y, G, targets);
  const auto& hp = state.hp;
  double v = 0.5 * (Y - state.D * G).squaredNorm();
  v += 0.5 * alpha * (state.A * G - targets.Q).squaredNorm();
  v += 0.5 * beta * (state.W * G - targets.H).squaredNorm();
  v += 0.5 * hp.eps_D * state.D.squaredNorm();
  v += 0.5 * hp.mu_A * state.A.squaredNorm();
  v += 0.5 * hp.rho_W * state.W.squaredNorm();
  return v;
}

double objective_topk(const ModelState& state, const Matrix& Y,
                      const Matrix& G, const SupervisionTargets& targets) {
  return objective_topk(state, Y, G, targets, state.hp.alpha, state.hp.beta);
}

double objective_convex(const ModelState& state, const Matrix& Y,
                        const Matrix& G, const SupervisionTargets& targets,
                        double alpha, double beta) {
  if (!has_unit_columns(state.D, kUnitNormTol))
    return std::numeric_limits<double>::infinity();
  double v = objective_topk(state, Y, G, targets, alpha, beta);
  v += 0.5 * state.hp.mu_G * G.squaredNorm();
  v += state.hp.lambda * G.cwiseAbs().sum();
  return v;
}

double objective_convex(const ModelState& state, const Matrix& Y,
                        const Matrix& G, const SupervisionTargets& targets) {
  return objective_convex(state, Y, G, targets, state.hp.alpha, state.hp.beta);
}

double smooth_part_G(const Matrix& G, const Matrix& Y, const Matrix& D,
                     const Matrix& A, const Matrix& W,
                     const SupervisionTargets& targets, double alpha,
                     double beta, double mu_G) {
  double v = 0.5 * (Y - D * G).squaredNorm() + 0.5 * mu_G * G.squaredNorm();
  if (alpha > 0.0) v += 0.5 * alpha * (A * G - targets.Q).squaredNorm();
  if (beta > 0.0) v += 0.5 * beta * (W * G - targets.H).squaredNorm();
  return v;
}

Matrix grad_G(const Matrix& G, const Matrix& Y, const Matrix& D,
              const Matrix& A, const Matrix& W,
              const SupervisionTargets& targets, double alpha, double beta,
              double mu_G) {
  Matrix g = -D.transpose() * (Y - D * G) + mu_G * G;
  if (alpha > 0.0) g.noalias() += alpha * (A.transpose() * (A * G - targets.Q));
  if (beta > 0.0) g.noalias() += beta * (W.transpose() * (W * G - targets.H));
  return g;
}

double composite_G(const Matrix& G, const Matrix& Y, const Matrix& D,
                   const Matrix& A, const Matrix& W,
                   const SupervisionTargets& targets, double alpha,
                   double beta, double mu_G, double lambda) {
  return smooth_part_G(G, Y, D, A, W, targets, alpha, beta, mu_G) +
         lambda * G.cwiseAbs().sum();
}

double smooth_part_D(const Matrix& D, const Matrix& Y, const Matrix& G,
                     double eps_D) {
  return 0.5 * (Y - D * G).squaredNorm() + 0.5 * eps_D * D.squaredNorm();
}

Matrix grad_D(const Matrix& D, const Matrix& Y, const Matrix& G,
              double eps_D) {
  return (D * G - Y) * G.transpose() + eps_D * D;
}

double lipschitz_G(const Matrix& D, const Matrix& A, const Matrix& W,
                   double alpha, double beta, double mu_G) {
  require_finite(D, "D");
  double L = spectral_norm_sq(D) + mu_G;
  if (alpha > 0.0 && A.size() > 0) L += alpha * spectral_norm_sq(A);
  if (beta > 0.0 && W.size() > 0) L += beta * spectral_norm_sq(W);
  return L;
}

double lipschitz_D(const Matrix& G, double eps_D) {
  require_finite(G, "G");
  return spectral_norm_sq(G) + eps_D;
}

}  // namespace sdl
