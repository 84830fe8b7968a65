#pragma once

#include <string>
#include <vector>

#include "core/types.hpp"
#include "encoders/fista.hpp"

namespace sdl {

// Encodes held-out features with the trained model: LISTA forward pass for
// the Top-K encoder, deterministic FISTA solve for the convex one.
Matrix encode_test(const Matrix& Y_test, const ModelState& state,
                   const FistaConfig& cfg = {});

// argmax over classes of W g, ties to the lowest class index.
std::vector<int> classify(const Matrix& G_test, const Matrix& W);

struct Metrics {
  double top1 = 0.0;
  double mean_nonzeros = 0.0;
  std::vector<double> per_class;  // accuracy per class index
  std::vector<int> per_class_count;

  std::string to_text() const;  // accuracy rendered to 4 decimals
};

Metrics metrics(const std::vector<int>& pred, const std::vector<int>& truth,
                const Matrix& G_test);

}  // namespace sdl
