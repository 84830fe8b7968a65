#pragma once

#include "core/types.hpp"

namespace sdl {

// Builds the LC-KSVD2 supervision targets. Q marks the K/C dictionary
// atoms assigned to each sample's class (contiguous row blocks in label
// order); H is the one-hot label matrix.
SupervisionTargets build_targets(const std::vector<int>& labels, int K, int C);

}  // namespace sdl
