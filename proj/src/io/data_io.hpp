#pragma once

#include <string>
#include <vector>

#include "core/types.hpp"

namespace sdl {

// Feature file: magic "SDLFEAT1", rows u32 LE, cols u32 LE, dtype byte
// (0x01 = float32 LE), then rows*cols*4 bytes of column-major float32.
// Values are widened to double in memory; non-finite entries are rejected.
Matrix load_features(const std::string& path);
void save_features(const Matrix& m, const std::string& path);

// Labels: UTF-8 text, one integer per line. Empty files are an error.
std::vector<int> load_labels(const std::string& path);
void save_labels(const std::vector<int>& labels, const std::string& path);

// Model file: magic "SDLMODL1"; all floating payloads are float64 LE so
// the round trip is bit-exact. B_stack is present iff encoder is TopKLista.
void save_model(const ModelState& state, const std::string& path);
ModelState load_model(const std::string& path);

struct SyntheticSpec {
  int d = 16;
  int N = 300;
  int K = 30;
  int C = 3;
  int T = 3;
  double noise_sigma = 0.0;
  double cluster_separation = 0.0;
  std::int64_t seed = 0;

  void validate() const {
    if (d < 1 || N < 1 || K < 1 || C < 1 || T < 1)
      throw ConfigError("synthetic: dimensions must be >= 1");
    if (K % C != 0) throw ConfigError("synthetic: K must be divisible by C");
    if (T > K / C) throw ConfigError("synthetic: T must be <= K/C");
    if (noise_sigma < 0.0 || cluster_separation < 0.0)
      throw ConfigError("synthetic: noise/separation must be >= 0");
  }
};

struct SyntheticData {
  Matrix Y;                 // d x N
  std::vector<int> labels;  // length N
  Matrix D_true;            // d x K, unit columns grouped in class blocks
  Matrix G_true;            // K x N, T-sparse within each sample's block
};

// Class-subspace synthetic generator: atom j of class c is the normalized
// sum of a Gaussian draw and cluster_separation times the class mean
// direction; sample i activates T distinct atoms of its class block with
// coefficients uniform in [0.5, 1.5]. Deterministic given seed.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace sdl
