#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace sdl {

// Absolute slack granted to every certificate inequality; proofs are
// exact, floating point is not.
inline constexpr double kCertGrace = 1e-10;

struct H1Check {
  bool pass = false;
  double decrease = 0.0;    // f_before - f_after
  double delta_norm = 0.0;  // ||x_next - x_prev||_F
  double min_a = 0.0;       // required decrease constant
  double measured_a = 0.0;  // decrease / delta^2 (0 when delta == 0)
};

// pass iff f_before - f_after >= min_a * delta^2 - grace.
H1Check check_h1(double f_before, double f_after, double delta_norm,
                 double min_a);

struct H2Witness {
  double witness_norm = 0.0;
  double bound = 0.0;        // (L + c) * ||delta||
  bool within_bound = false;
  bool membership = false;   // witness is a valid subgradient element
};

// Subgradient witness of the G prox step:
//   W_G = grad H_G(G_next) - grad H_G(G_prev) - c_G (G_next - G_prev)
// with membership checked entrywise against lambda * subgradient(|.|).
H2Witness h2_witness_G(const Matrix& G_prev, const Matrix& G_next,
                       const Matrix& Y, const ModelState& state,
                       const SupervisionTargets& targets, double alpha,
                       double beta, double c_G);

// Normal-cone witness of the projected D step:
//   v_D = -grad H_D(D_prev) - c_D (D_next - D_prev),
//   W_D = v_D + grad H_D(D_next)
// Membership: each v_D column lies along the corresponding unit atom.
H2Witness h2_witness_D(const Matrix& D_prev, const Matrix& D_next,
                       const Matrix& Y, const Matrix& G, double eps_D,
                       double c_D);

// Exact-minimizer witness for A (or W with (H, beta, rho_W)):
// ||grad f3(A)||_F, which the closed form drives to solver precision.
double h2_residual_ridge(const Matrix& X, const Matrix& G,
                         const Matrix& target, double weight, double ridge);

struct BoundsReport {
  bool pass = false;
  double g_value = 0.0, g_bound = 0.0;
  double a_value = 0.0, a_bound = 0.0;
  double w_value = 0.0, w_bound = 0.0;
  double max_column_norm_err = 0.0;  // dictionary unit-norm deviation
};

// Boundedness margins from the convergence analysis:
//   ||G||_F^2 <= (1/mu_G)(||Y||_F^2 + a||Q||_F^2 + b||H||_F^2)
//   ||A||_F <= (a/mu_A)||Q||_F ||G||_2,   ||W||_F <= (b/rho_W)||H||_F ||G||_2
// plus per-column unit norms of D (the per-column reading of the paper's
// normalization claim).
BoundsReport check_bounds(const ModelState& state, const Matrix& G,
                          const Matrix& Y, const SupervisionTargets& targets,
                          double alpha, double beta);

// Central finite differences along random unit directions vs the analytic
// directional derivative of the smooth block objective.
bool gradient_audit_G(const Matrix& G, const Matrix& Y,
                      const ModelState& state,
                      const SupervisionTargets& targets, int probes,
                      double tol, std::uint64_t seed,
                      double* worst_rel_err = nullptr);
bool gradient_audit_D(const Matrix& D, const Matrix& Y, const Matrix& G,
                      double eps_D, int probes, double tol, std::uint64_t seed,
                      double* worst_rel_err = nullptr);

// One certified sweep record.
struct CertRow {
  int iteration = 0;
  double objective_before = 0.0;
  double objective_after = 0.0;
  // per-block H1
  H1Check h1_G, h1_D, h1_A, h1_W;
  // per-block H2
  H2Witness h2_G, h2_D;
  double h2_A_residual = 0.0, h2_W_residual = 0.0;
  bool h2_A_pass = false, h2_W_pass = false;
  BoundsReport bounds;
  double sweep_delta = 0.0;      // ||Z_next - Z_prev||_F over all blocks
  double telescope_err = 0.0;    // |sum of block decreases - sweep decrease|
  bool pass = false;
};

struct ConvergenceRow {
  int iteration = 0;
  double alpha_t = 0.0, beta_t = 0.0;
  double objective = 0.0;  // pipeline objective at the ramped weights
  double delta = 0.0;      // ||Z_{t+1} - Z_t||_F
};

struct PalmCertificate {
  std::vector<CertRow> rows;
  // Convergence track of the convex training pipeline on the same data
  // (iterate-difference sequence and its objective).
  std::vector<ConvergenceRow> convergence;
  double convergence_min_delta = 0.0;
  int convergence_first_below = -1;  // first t with delta < threshold
  double convergence_threshold = 1e-4;
  bool convergence_pass = false;
  bool monotone_pass = false;  // fixed-weight plateau objective monotone
  bool cert_pass = false;      // every row passes
  bool pass = false;

  void finalize();
  std::string to_text() const;
  std::string to_json() const;
};

}  // namespace sdl
