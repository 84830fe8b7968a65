#include "diag/palm_cert.hpp"

#include <cmath>
#include <sstream>

#include "core/linalg.hpp"
#include "core/objective.hpp"
#include "core/rng.hpp"
#include "json.hpp"

namespace sdl {

H1Check check_h1(double f_before, double f_after, double delta_norm,
                 double min_a) {
  if (delta_norm < 0.0) throw ConfigError("check_h1: delta_norm < 0");
  H1Check r;
  r.decrease = f_before - f_after;
  r.delta_norm = delta_norm;
  r.min_a = min_a;
  r.measured_a = delta_norm > 0.0 ? r.decrease / (delta_norm * delta_norm) : 0.0;
  r.pass = r.decrease >= min_a * delta_norm * delta_norm - kCertGrace;
  return r;
}

H2Witness h2_witness_G(const Matrix& G_prev, const Matrix& G_next,
                       const Matrix& Y, const ModelState& state,
                       const SupervisionTargets& targets, double alpha,
                       double beta, double c_G) {
  require_finite(G_prev, "G_prev");
  require_finite(G_next, "G_next");
  const double mu_G = state.hp.mu_G, lambda = state.hp.lambda;
  const Matrix g_prev =
      grad_G(G_prev, Y, state.D, state.A, state.W, targets, alpha, beta, mu_G);
  const Matrix g_next =
      grad_G(G_next, Y, state.D, state.A, state.W, targets, alpha, beta, mu_G);
  const Matrix delta = G_next - G_prev;
  const Matrix witness = g_next - g_prev - c_G * delta;

  H2Witness r;
  r.witness_norm = witness.norm();
  const double L =
      lipschitz_G(state.D, state.A, state.W, alpha, beta, mu_G);
  r.bound = (L + c_G) * delta.norm();
  r.within_bound = r.witness_norm <= r.bound + kCertGrace;

  // S = witness - grad H_G(G_next) must lie in lambda * d||.||_1(G_next):
  // S = lambda sign(g) on nonzeros, |S| <= lambda on zeros. The prox
  // optimality makes this exact up to arithmetic noise; scale-aware slack.
  const Matrix S = witness - g_next;
  const double tol =
      1e-8 * std::max(1.0, g_prev.cwiseAbs().maxCoeff() +
                               c_G * delta.cwiseAbs().maxCoeff());
  r.membership = true;
  for (Eigen::Index j = 0; j < G_next.cols() && r.membership; ++j) {
    for (Eigen::Index i = 0; i < G_next.rows(); ++i) {
      const double g = G_next(i, j), s = S(i, j);
      const bool ok = g == 0.0
                          ? std::abs(s) <= lambda + tol
                          : std::abs(s - lambda * (g > 0 ? 1 : -1)) <= tol;
      if (!ok) {
        r.membership = false;
        break;
      }
    }
  }
  return r;
}

H2Witness h2_witness_D(const Matrix& D_prev, const Matrix& D_next,
                       const Matrix& Y, const Matrix& G, double eps_D,
                       double c_D) {
  require_finite(D_prev, "D_prev");
  require_finite(D_next, "D_next");
  const Matrix g_prev = grad_D(D_prev, Y, G, eps_D);
  const Matrix g_next = grad_D(D_next, Y, G, eps_D);
  const Matrix delta = D_next - D_prev;
  const Matrix v = -g_prev - c_D * delta;  // normal-cone element
  const Matrix witness = v + g_next;

  H2Witness r;
  r.witness_norm = witness.norm();
  const double L = lipschitz_D(G, eps_D);
  r.bound = (L + c_D) * delta.norm();
  r.within_bound = r.witness_norm <= r.bound + kCertGrace;

  // Membership in the normal cone of the product of unit spheres at
  // D_next: columnwise, v_j must be parallel to d_j. Exact for the
  // normalize-projection up to roundoff; dead (reseeded) columns are
  // exempt when the step was not a pure projection of the gradient step.
  const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
  r.membership = true;
  for (Eigen::Index j = 0; j < D_next.cols(); ++j) {
    const Vector vj = v.col(j);
    const Vector dj = D_next.col(j);
    const Vector tangential = vj - dj * dj.dot(vj);
    if (tangential.norm() > 1e-7 * scale) {
      r.membership = false;
      break;
    }
  }
  return r;
}

double h2_residual_ridge(const Matrix& X, const Matrix& G,
                         const Matrix& target, double weight, double ridge) {
  return (weight * (X * G - target) * G.transpose() + ridge * X).norm();
}

BoundsReport check_bounds(const ModelState& state, const Matrix& G,
                          const Matrix& Y, const SupervisionTargets& targets,
                          double alpha, double beta) {
  BoundsReport r;
  const auto& hp = state.hp;
  const double g2 = spectral_norm_sq(G);
  const double g_spec = std::sqrt(std::max(g2, 0.0));

  r.g_value = G.squaredNorm();
  r.g_bound = (Y.squaredNorm() + alpha * targets.Q.squaredNorm() +
               beta * targets.H.squaredNorm()) /
              hp.mu_G;
  r.a_value = state.A.norm();
  r.a_bound = alpha / hp.mu_A * targets.Q.norm() * g_spec;
  r.w_value = state.W.norm();
  r.w_bound = beta / hp.rho_W * targets.H.norm() * g_spec;

  r.max_column_norm_err = 0.0;
  for (Eigen::Index j = 0; j < state.D.cols(); ++j)
    r.max_column_norm_err = std::max(r.max_column_norm_err,
                                     std::abs(state.D.col(j).norm() - 1.0));

  r.pass = r.g_value <= r.g_bound + kCertGrace &&
           r.a_value <= r.a_bound + kCertGrace &&
           r.w_value <= r.w_bound + kCertGrace &&
           r.max_column_norm_err <= kUnitNormTol;
  return r;
}

namespace {

template <typename ValueFn>
bool audit_directions(const Matrix& point, const Matrix& analytic,
                      ValueFn&& value, int probes, double tol,
                      std::uint64_t seed, double* worst_rel_err) {
  if (probes < 1) throw ConfigError("gradient_audit: probes must be >= 1");
  Rng rng(seed);
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    Matrix U(point.rows(), point.cols());
    for (Eigen::Index j = 0; j < U.cols(); ++j)
      for (Eigen::Index i = 0; i < U.rows(); ++i) U(i, j) = rng.gaussian();
    U /= U.norm();
    const double h = 1e-5 * std::max(1.0, point.norm());
    const double fd = (value(point + h * U) - value(point - h * U)) / (2.0 * h);
    const double dd = (analytic.array() * U.array()).sum();
    const double rel = std::abs(fd - dd) / std::max(1.0, std::abs(dd));
    worst = std::max(worst, rel);
  }
  if (worst_rel_err) *worst_rel_err = worst;
  return worst <= tol;
}

}  // namespace

bool gradient_audit_G(const Matrix& G, const Matrix& Y,
                      const ModelState& state,
                      const SupervisionTargets& targets, int probes,
                      double tol, std::uint64_t seed, double* worst_rel_err) {
  const auto& hp = state.hp;
  const Matrix analytic = grad_G(G, Y, state.D, state.A, state.W, targets,
                                 hp.alpha, hp.beta, hp.mu_G);
  return audit_directions(
      G, analytic,
      [&](const Matrix& X) {
        return smooth_part_G(X, Y, state.D, state.A, state.W, targets,
                             hp.alpha, hp.beta, hp.mu_G);
      },
      probes, tol, seed, worst_rel_err);
}

bool gradient_audit_D(const Matrix& D, const Matrix& Y, const Matrix& G,
                      double eps_D, int probes, double tol, std::uint64_t seed,
                      double* worst_rel_err) {
  const Matrix analytic = grad_D(D, Y, G, eps_D);
  return audit_directions(
      D, analytic,
      [&](const Matrix& X) { return smooth_part_D(X, Y, G, eps_D); }, probes,
      tol, seed, worst_rel_err);
}

void PalmCertificate::finalize() {
  cert_pass = !rows.empty();
  for (const auto& r : rows) cert_pass = cert_pass && r.pass;

  convergence_min_delta = std::numeric_limits<double>::infinity();
  convergence_first_below = -1;
  for (const auto& c : convergence) {
    if (c.delta < convergence_min_delta) convergence_min_delta = c.delta;
    if (convergence_first_below < 0 && c.delta < convergence_threshold)
      convergence_first_below = c.iteration;
  }
  convergence_pass = convergence_first_below >= 0;
  pass = cert_pass && convergence_pass && monotone_pass;
}

std::string PalmCertificate::to_text() const {
  std::ostringstream os;
  os.setf(std::ios::scientific);
  os.precision(6);
  os << "# PALM certificate\n";
  os << "# convergence track: " << convergence.size() << " outer iterations\n";
  for (const auto& c : convergence)
    os << "conv it=" << c.iteration << " alpha=" << c.alpha_t
       << " beta=" << c.beta_t << " objective=" << c.objective
       << " delta=" << c.delta << "\n";
  os << "convergence min_delta=" << convergence_min_delta
     << " first_below_1e-4=" << convergence_first_below
     << " pass=" << (convergence_pass ? 1 : 0)
     << " monotone=" << (monotone_pass ? 1 : 0) << "\n";
  os << "# certified sweeps: " << rows.size() << "\n";
  for (const auto& r : rows) {
    os << "cert it=" << r.iteration << " F0=" << r.objective_before
       << " F1=" << r.objective_after << " delta=" << r.sweep_delta
       << " | H1 G(a=" << r.h1_G.measured_a << "," << (r.h1_G.pass ? 1 : 0)
       << ") D(a=" << r.h1_D.measured_a << "," << (r.h1_D.pass ? 1 : 0)
       << ") A(a=" << r.h1_A.measured_a << "," << (r.h1_A.pass ? 1 : 0)
       << ") W(a=" << r.h1_W.measured_a << "," << (r.h1_W.pass ? 1 : 0)
       << ") | H2 G(" << r.h2_G.witness_norm << "<=" << r.h2_G.bound << ","
       << (r.h2_G.within_bound && r.h2_G.membership ? 1 : 0) << ") D("
       << r.h2_D.witness_norm << "<=" << r.h2_D.bound << ","
       << (r.h2_D.within_bound && r.h2_D.membership ? 1 : 0)
       << ") A(res=" << r.h2_A_residual << "," << (r.h2_A_pass ? 1 : 0)
       << ") W(res=" << r.h2_W_residual << "," << (r.h2_W_pass ? 1 : 0)
       << ") | bounds=" << (r.bounds.pass ? 1 : 0)
       << " telescope_err=" << r.telescope_err << " pass=" << (r.pass ? 1 : 0)
       << "\n";
  }
  os << "certificate pass=" << (cert_pass ? 1 : 0) << "\n";
  os << "overall pass=" << (pass ? 1 : 0) << "\n";
  return os.str();
}

std::string PalmCertificate::to_json() const {
  nlohmann::json j;
  j["convergence_threshold"] = convergence_threshold;
  j["convergence_min_delta"] = convergence_min_delta;
  j["convergence_first_below"] = convergence_first_below;
  j["convergence_pass"] = convergence_pass;
  j["monotone_pass"] = monotone_pass;
  j["cert_pass"] = cert_pass;
  j["pass"] = pass;
  auto& conv = j["convergence"] = nlohmann::json::array();
  for (const auto& c : convergence)
    conv.push_back({{"it", c.iteration},
                    {"alpha", c.alpha_t},
                    {"beta", c.beta_t},
                    {"objective", c.objective},
                    {"delta", c.delta}});
  auto h1j = [](const H1Check& h) {
    return nlohmann::json{{"pass", h.pass},
                          {"decrease", h.decrease},
                          {"delta", h.delta_norm},
                          {"min_a", h.min_a},
                          {"measured_a", h.measured_a}};
  };
  auto h2j = [](const H2Witness& h) {
    return nlohmann::json{{"witness", h.witness_norm},
                          {"bound", h.bound},
                          {"within_bound", h.within_bound},
                          {"membership", h.membership}};
  };
  auto& rws = j["certified"] = nlohmann::json::array();
  for (const auto& r : rows) {
    rws.push_back({{"it", r.iteration},
                   {"F_before", r.objective_before},
                   {"F_after", r.objective_after},
                   {"delta", r.sweep_delta},
                   {"telescope_err", r.telescope_err},
                   {"H1_G", h1j(r.h1_G)},
                   {"H1_D", h1j(r.h1_D)},
                   {"H1_A", h1j(r.h1_A)},
                   {"H1_W", h1j(r.h1_W)},
                   {"H2_G", h2j(r.h2_G)},
                   {"H2_D", h2j(r.h2_D)},
                   {"H2_A_residual", r.h2_A_residual},
                   {"H2_A_pass", r.h2_A_pass},
                   {"H2_W_residual", r.h2_W_residual},
                   {"H2_W_pass", r.h2_W_pass},
                   {"bounds_pass", r.bounds.pass},
                   {"pass", r.pass}});
  }
  return j.dump(2);
}

}  // namespace sdl
