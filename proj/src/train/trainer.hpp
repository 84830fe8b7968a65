#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/types.hpp"
#include "diag/palm_cert.hpp"
#include "encoders/fista.hpp"

namespace sdl {

struct Schedule {
  int warmup_iters = 2;
  int ramp_iters = 3;
  double alpha_max = 1.0;
  double beta_max = 1.0;
};

// Linear supervision ramp: s(t) = 0 during warm-up, then
// clamp((t - warmup + 1)/ramp, 0, 1).
std::pair<double, double> ramp(int t, const Schedule& sched);

struct BTrainConfig {
  double learning_rate = 0.0;  // <= 0 selects the adaptive default
  int inner_steps = 5;
  double grad_clip = 1e3;

  void validate() const {
    if (inner_steps < 0) throw ConfigError("b_inner_steps must be >= 0");
    if (!(grad_clip > 0.0)) throw ConfigError("b_grad_clip must be > 0");
  }
};

enum class WarmupEncoder { Auto, TopK, Fista };

struct TrainOptions {
  FistaConfig fista;
  BTrainConfig b_train;
  // Default convex G-update solves the unsupervised elastic net; this flag
  // swaps in the single supervised proximal-gradient step analyzed by the
  // convergence theory.
  bool supervised_g_update = false;
  // c_G = cg_factor * L_G for the supervised prox step (step = 1/c_G).
  double cg_factor = 2.0;
  WarmupEncoder warmup_encoder = WarmupEncoder::Auto;
  double divergence_tol = 1e-9;
  bool record_certificate = false;  // fill H1/H2 row checks during training
};

struct IterationRecord {
  int iteration = 0;
  double alpha_t = 0.0, beta_t = 0.0;
  double objective = 0.0;  // pipeline objective at the ramped weights
  double decrease_G = 0.0, decrease_D = 0.0, decrease_A = 0.0,
         decrease_W = 0.0;
  double g_norm = 0.0, a_norm = 0.0, w_norm = 0.0;
  double delta = 0.0;  // ||Z_{t+1} - Z_t||_F
  double train_accuracy = 0.0;
  double wall_seconds = 0.0;  // console-only; excluded from report files
  bool h1_pass = true, h2_pass = true, bounds_pass = true;  // certify mode
};

struct TrainReport {
  std::vector<IterationRecord> rows;
  std::string pipeline;  // "topk" or "fista"
  bool certified = false;

  std::string to_text() const;   // human-readable table (no wall time)
  std::string to_json() const;   // structured (no wall time)
};

// Seeded model initialization: D from distinct data columns (Gaussian
// fallback when N < K), A and W zero, classical LISTA init
// B^(t) = D'/||D'D||_2 for the Top-K encoder.
ModelState init_model(const Matrix& Y, int K, int C, const HyperParams& hp,
                      EncoderKind kind);

// Refreshes every layer of B_stack to the classical init from the current
// dictionary.
void reset_b_stack(ModelState& state);

// Unsupervised warm-up: alternates encoder / dictionary update for
// hp.warmup_iters iterations at alpha = beta = 0. G is returned so the
// caller can continue from the warm codes.
Matrix warmup_phase(const Matrix& Y, ModelState& state,
                    const TrainOptions& opts);

// inner_steps gradient-descent steps on the discriminative objective as a
// function of B (fixed-support backprop), with backtracking halving so the
// loss never increases. Returns the final loss.
double b_gradient_step(const Matrix& Y, const SupervisionTargets& targets,
                       ModelState& state, double alpha_t, double beta_t,
                       const BTrainConfig& cfg);

// Full two-stage training run.
std::pair<ModelState, TrainReport> train(const Matrix& Y,
                                         const SupervisionTargets& targets,
                                         const HyperParams& hp,
                                         EncoderKind kind,
                                         const TrainOptions& opts = {});

struct CertifyOptions {
  TrainOptions train;
  int certify_iters = 50;
  double cg_factor = 1.02;  // < 1 constructs the H1 violation deliberately
  double convergence_threshold = 1e-4;
};

struct CertifyOutcome {
  ModelState state;
  PalmCertificate certificate;
  TrainReport report;
};

// Runs the convex pipeline (criterion: iterate convergence and monotone
// plateau objective), then a window of supervised PALM sweeps at fixed
// (alpha_max, beta_max) with every H1/H2/boundedness inequality checked.
CertifyOutcome run_certify(const Matrix& Y, const SupervisionTargets& targets,
                           const HyperParams& hp, const CertifyOptions& opts);

// The certified window alone: `iters` supervised PALM sweeps from the
// given state at fixed (hp.alpha, hp.beta), G re-solved and A/W
// re-derived at entry. cg_factor < 1 deliberately violates the step-size
// premise so the H1 failure path can be demonstrated.
std::vector<CertRow> certified_window(ModelState& state, const Matrix& Y,
                                      const SupervisionTargets& targets,
                                      int iters, double cg_factor,
                                      const FistaConfig& fista_cfg = {});

}  // namespace sdl
