#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "core/errors.hpp"

namespace sdl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// All matrices are column-major (Eigen default); a sample is a column.

enum class EncoderKind : std::uint8_t { TopKLista = 0, FistaLasso = 1 };

struct HyperParams {
  double alpha = 1.0;   // label-consistency weight
  double beta = 1.0;    // classifier weight
  double mu_A = 1.0;    // ridge on A
  double rho_W = 1.0;   // ridge on W
  double eps_D = 0.1;   // ridge on D
  double mu_G = 0.05;   // ridge on G (convex regime)
  double lambda = 1e-2; // l1 weight on G (convex regime)

  int T = 50;           // Top-K budget per code column
  int n_layers = 16;    // LISTA unroll depth
  int warmup_iters = 2;
  int ramp_iters = 3;
  int max_outer = 30;
  std::int64_t seed = 0;

  void validate(int K) const {
    auto pos = [](double v, const char* name) {
      if (!(v > 0.0))
        throw ConfigError(std::string(name) + " must be strictly positive");
    };
    pos(alpha, "alpha");
    pos(beta, "beta");
    pos(mu_A, "mu_A");
    pos(rho_W, "rho_W");
    pos(eps_D, "eps_D");
    pos(mu_G, "mu_G");
    pos(lambda, "lambda");
    if (T < 1 || T > K) throw ConfigError("T must satisfy 1 <= T <= K");
    if (n_layers < 1) throw ConfigError("n_layers must be >= 1");
    if (warmup_iters < 1) throw ConfigError("warmup_iters must be >= 1");
    if (ramp_iters < 1) throw ConfigError("ramp_iters must be >= 1");
    if (max_outer < 1) throw ConfigError("max_outer must be >= 1");
    if (warmup_iters + ramp_iters > max_outer)
      throw ConfigError("warmup_iters + ramp_iters must not exceed max_outer");
  }
};

struct SupervisionTargets {
  Matrix Q;                 // K x N, 0/1 entries, K/C ones per column
  Matrix H;                 // C x N, one-hot columns
  std::vector<int> labels;  // length N, values in [0, C)
};

struct ModelState {
  Matrix D;                    // d x K, unit-norm columns
  Matrix A;                    // K x K
  Matrix W;                    // C x K
  std::vector<Matrix> B_stack; // n_layers of K x d; TopKLista only
  HyperParams hp;
  EncoderKind encoder_kind = EncoderKind::FistaLasso;

  Eigen::Index d() const { return D.rows(); }
  Eigen::Index K() const { return D.cols(); }
  Eigen::Index C() const { return W.rows(); }
};

inline void require(bool cond, const char* what) {
  if (!cond) throw DimensionError(what);
}

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite())
    throw DataError(std::string(what) + " contains non-finite entries");
}

}  // namespace sdl
