#include "core/targets.hpp"

namespace sdl {

SupervisionTargets build_targets(const std::vector<int>& labels, int K, int C) {
  if (K < 1 || C < 1) throw ConfigError("build_targets: K and C must be >= 1");
  if (K % C != 0)
    throw ConfigError("build_targets: K (" + std::to_string(K) +
                      ") must be divisible by C (" + std::to_string(C) + ")");
  if (labels.empty()) throw DataError("build_targets: no labels");

  const int block = K / C;
  const Eigen::Index N = static_cast<Eigen::Index>(labels.size());
  SupervisionTargets t;
  t.Q = Matrix::Zero(K, N);
  t.H = Matrix::Zero(C, N);
  t.labels = labels;
  for (Eigen::Index i = 0; i < N; ++i) {
    const int c = labels[static_cast<size_t>(i)];
    if (c < 0 || c >= C)
      throw DataError("build_targets: label " + std::to_string(c) +
                      " out of range [0, " + std::to_string(C) + ")");
    t.Q.block(c * block, i, block, 1).setOnes();
    t.H(c, i) = 1.0;
  }
  return t;
}

}  // namespace sdl
