#pragma once

#include "core/types.hpp"

namespace sdl {

struct FistaConfig {
  int max_iters = 2000;
  double rel_tol = 1e-8;  // stopping threshold on relative iterate change

  void validate() const {
    if (max_iters < 1) throw ConfigError("fista: max_iters must be >= 1");
    if (!(rel_tol > 0.0)) throw ConfigError("fista: rel_tol must be > 0");
  }
};

struct FistaResult {
  Matrix G;
  int iters = 0;
  bool converged = false;
  double objective = 0.0;
};

// Deterministic FISTA for the elastic-net coding problem
//   min_G 1/2||Y - DG||_F^2 + mu_G/2 ||G||_F^2 + lambda ||G||_1
// with the standard momentum schedule and a function-value restart that
// keeps the objective sequence non-increasing. G_init (optional) warm
// starts the solve; the minimizer is unique (mu_G > 0) so it only affects
// iteration count.
FistaResult fista_lasso(const Matrix& Y, const Matrix& D, double lambda,
                        double mu_G, const FistaConfig& cfg = {},
                        const Matrix* G_init = nullptr);

// Max-norm KKT residual of the elastic-net problem at G: zero entries
// must satisfy |grad| <= lambda, nonzero entries grad = -lambda sign(g).
double elastic_net_kkt_residual(const Matrix& Y, const Matrix& D,
                                double lambda, double mu_G, const Matrix& G);

// One proximal-gradient step on f1(G) = H_G(G) + lambda||G||_1 with the
// given step size (no guard; callers own the premise).
Matrix prox_step_G(const Matrix& G, const Matrix& Y, const ModelState& state,
                   const SupervisionTargets& targets, double alpha,
                   double beta, double step);

// Spec'd supervised G-update: a single monotone proximal-gradient step.
// Requires step < 1/L_G (the PALM premise); violating it is an error.
Matrix prox_grad_G_supervised(const Matrix& Y, const ModelState& state,
                              const SupervisionTargets& targets,
                              const Matrix& G_init, double step);
Matrix prox_grad_G_supervised(const Matrix& Y, const ModelState& state,
                              const SupervisionTargets& targets,
                              const Matrix& G_init, double step, double alpha,
                              double beta);

}  // namespace sdl
