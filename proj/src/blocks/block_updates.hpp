#pragma once

#include <cstdint>

#include "core/types.hpp"

namespace sdl {

// Ridge closed-form dictionary update D <- Y G' (G G' + eps_D I)^-1
// followed by column normalization. Dead columns (norm < 1e-12 before
// normalization) are replaced deterministically from the (salt, column)
// stream.
Matrix update_dictionary_closed(const Matrix& Y, const Matrix& G, double eps_D,
                                std::uint64_t salt);

// One projected-gradient step with step 1/L_D, L_D = ||GG'||_2 + eps_D,
// gradient (DG - Y)G' + eps_D D, then column normalization.
Matrix update_dictionary_pgd(const Matrix& D, const Matrix& Y, const Matrix& G,
                             double eps_D, std::uint64_t salt);

// Ridge closed forms for the label-consistency transform and the linear
// classifier:
//   A <- Q G' (G G' + (mu_A/alpha) I)^-1
//   W <- H G' (G G' + (rho_W/beta) I)^-1
Matrix update_lc_matrix(const Matrix& G, const Matrix& Q, double alpha,
                        double mu_A);
Matrix update_classifier(const Matrix& G, const Matrix& H, double beta,
                         double rho_W);

}  // namespace sdl
