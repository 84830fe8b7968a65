#pragma once

#include "core/types.hpp"

namespace sdl {

// Unit-norm tolerance for the dictionary feasibility set C.
inline constexpr double kUnitNormTol = 1e-8;

// Six-term discriminative objective (Top-K regime):
//   1/2 ||Y - DG||_F^2 + a/2 ||AG - Q||_F^2 + b/2 ||WG - H||_F^2
//   + eps_D/2 ||D||_F^2 + mu_A/2 ||A||_F^2 + rho_W/2 ||W||_F^2
// alpha/beta taken from `hp` unless overridden (the trainer evaluates at
// the ramped weights).
double objective_topk(const ModelState& state, const Matrix& Y, const Matrix& G,
                      const SupervisionTargets& targets);
double objective_topk(const ModelState& state, const Matrix& Y, const Matrix& G,
                      const SupervisionTargets& targets, double alpha,
                      double beta);

// Convex objective: objective_topk plus mu_G/2 ||G||_F^2 + lambda ||G||_1
// and the indicator of unit-norm dictionary columns (+inf when violated
// beyond kUnitNormTol).
double objective_convex(const ModelState& state, const Matrix& Y,
                        const Matrix& G, const SupervisionTargets& targets);
double objective_convex(const ModelState& state, const Matrix& Y,
                        const Matrix& G, const SupervisionTargets& targets,
                        double alpha, double beta);

// Smooth part of the G-subproblem and its gradient:
//   H_G(G) = 1/2||Y-DG||^2 + a/2||AG-Q||^2 + b/2||WG-H||^2 + mu_G/2||G||^2
//   grad = -D'(Y-DG) + a A'(AG-Q) + b W'(WG-H) + mu_G G
double smooth_part_G(const Matrix& G, const Matrix& Y, const Matrix& D,
                     const Matrix& A, const Matrix& W,
                     const SupervisionTargets& targets, double alpha,
                     double beta, double mu_G);
Matrix grad_G(const Matrix& G, const Matrix& Y, const Matrix& D,
              const Matrix& A, const Matrix& W,
              const SupervisionTargets& targets, double alpha, double beta,
              double mu_G);

// G-block composite f1(G) = H_G(G) + lambda ||G||_1.
double composite_G(const Matrix& G, const Matrix& Y, const Matrix& D,
                   const Matrix& A, const Matrix& W,
                   const SupervisionTargets& targets, double alpha,
                   double beta, double mu_G, double lambda);

// Smooth part of the D-subproblem and its gradient:
//   H_D(D) = 1/2||Y-DG||^2 + eps_D/2||D||^2,  grad = (DG-Y)G' + eps_D D
double smooth_part_D(const Matrix& D, const Matrix& Y, const Matrix& G,
                     double eps_D);
Matrix grad_D(const Matrix& D, const Matrix& Y, const Matrix& G, double eps_D);

// Block Lipschitz constants (spectral norms by power iteration):
//   L_G = ||D'D||_2 + a||A'A||_2 + b||W'W||_2 + mu_G
//   L_D = ||G||_2^2 + eps_D
double lipschitz_G(const Matrix& D, const Matrix& A, const Matrix& W,
                   double alpha, double beta, double mu_G);
double lipschitz_D(const Matrix& G, double eps_D);

}  // namespace sdl
