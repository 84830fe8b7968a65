#include "encoders/fista.hpp"

#include <cmath>

#include "core/linalg.hpp"
#include "core/objective.hpp"

namespace sdl {

namespace {

inline Matrix soft_threshold(const Matrix& X, double t) {
  return X.unaryExpr([t](double x) {
    const double m = std::abs(x) - t;
    return m > 0.0 ? (x > 0.0 ? m : -m) : 0.0;
  });
}

}  // namespace

FistaResult fista_lasso(const Matrix& Y, const Matrix& D, double lambda,
                        double mu_G, const FistaConfig& cfg,
                        const Matrix* G_init) {
  cfg.validate();
  if (lambda < 0.0) throw ConfigError("fista_lasso: lambda must be >= 0");
  if (!(mu_G > 0.0)) throw ConfigError("fista_lasso: mu_G must be > 0");
  require(Y.rows() == D.rows(), "fista_lasso: Y rows != D rows");
  require_finite(Y, "Y");
  require_finite(D, "D");

  const Eigen::Index K = D.cols(), N = Y.cols();
  const double L = spectral_norm_sq(D) + mu_G;
  const Matrix DtY = D.transpose() * Y;

  auto objective = [&](const Matrix& G) {
    return 0.5 * (Y - D * G).squaredNorm() + 0.5 * mu_G * G.squaredNorm() +
           lambda * G.cwiseAbs().sum();
  };
  auto grad = [&](const Matrix& G) -> Matrix {
    return D.transpose() * (D * G) - DtY + mu_G * G;
  };

  Matrix X = G_init ? *G_init : Matrix::Zero(K, N);
  if (G_init)
    require(G_init->rows() == K && G_init->cols() == N,
            "fista_lasso: G_init shape mismatch");
  Matrix Yk = X;
  double t = 1.0;
  double fx = objective(X);

  FistaResult res;
  for (int it = 0; it < cfg.max_iters; ++it) {
    Matrix Z = soft_threshold(Yk - grad(Yk) / L, lambda / L);
    double fz = objective(Z);
    if (fz > fx) {
      // momentum restart: plain prox step from X cannot increase the
      // objective (step = 1/L)
      t = 1.0;
      Z = soft_threshold(X - grad(X) / L, lambda / L);
      fz = objective(Z);
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double dn = (Z - X).norm();
    Yk = Z + ((t - 1.0) / t_next) * (Z - X);
    X = std::move(Z);
    fx = fz;
    t = t_next;
    res.iters = it + 1;
    if (dn <= cfg.rel_tol * std::max(1.0, X.norm())) {
      res.converged = true;
      break;
    }
  }
  res.G = std::move(X);
  res.objective = fx;
  return res;
}

double elastic_net_kkt_residual(const Matrix& Y, const Matrix& D,
                                double lambda, double mu_G, const Matrix& G) {
  const Matrix grad = D.transpose() * (D * G - Y) + mu_G * G;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < G.cols(); ++j) {
    for (Eigen::Index i = 0; i < G.rows(); ++i) {
      const double g = G(i, j), d = grad(i, j);
      const double viol = g == 0.0 ? std::max(0.0, std::abs(d) - lambda)
                                   : std::abs(d + lambda * (g > 0 ? 1 : -1));
      worst = std::max(worst, viol);
    }
  }
  return worst;
}

Matrix prox_step_G(const Matrix& G, const Matrix& Y, const ModelState& state,
                   const SupervisionTargets& targets, double alpha,
                   double beta, double step) {
  const Matrix g = grad_G(G, Y, state.D, state.A, state.W, targets, alpha,
                          beta, state.hp.mu_G);
  return soft_threshold(G - step * g, step * state.hp.lambda);
}

Matrix prox_grad_G_supervised(const Matrix& Y, const ModelState& state,
                              const SupervisionTargets& targets,
                              const Matrix& G_init, double step, double alpha,
                              double beta) {
  if (!(step > 0.0)) throw ConfigError("prox_grad_G_supervised: step <= 0");
  const double L =
      lipschitz_G(state.D, state.A, state.W, alpha, beta, state.hp.mu_G);
  if (step >= 1.0 / L)
    throw ConfigError("prox_grad_G_supervised: step " + std::to_string(step) +
                      " violates step < 1/L_G with L_G = " + std::to_string(L));
  require(G_init.rows() == state.D.cols() && G_init.cols() == Y.cols(),
          "prox_grad_G_supervised: G_init shape mismatch");
  return prox_step_G(G_init, Y, state, targets, alpha, beta, step);
}

Matrix prox_grad_G_supervised(const Matrix& Y, const ModelState& state,
                              const SupervisionTargets& targets,
                              const Matrix& G_init, double step) {
  return prox_grad_G_supervised(Y, state, targets, G_init, step,
                                state.hp.alpha, state.hp.beta);
}

}  // namespace sdl
