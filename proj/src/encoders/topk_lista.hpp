#pragma once

#include <vector>

#include "core/types.hpp"

namespace sdl {

// Forward-pass record for backprop: pre-shrinkage activations and the
// kept-support masks of every layer. Layer inputs are recovered as
// G^(t) = mask^(t) .* pre^(t); G^(-1) = 0.
struct ListaTrace {
  std::vector<Matrix> pre;                       // n_layers of K x N
  std::vector<Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>> mask;
  Eigen::Index d = 0, K = 0, N = 0;
  int T = 0;

  Matrix layer_output(int t) const {
    return mask[static_cast<size_t>(t)].select(pre[static_cast<size_t>(t)],
                                               0.0);
  }
};

// Keeps the T largest-magnitude entries of v, zeroing the rest. Exact
// zeros never count toward the budget; magnitude ties resolve to the
// lower index.
Vector topk_shrink(const Vector& v, int T);

// Strict Top-K LISTA forward pass:
//   G <- T_K(B^(t) Y + (I - B^(t) D) G),  G initialized to zero,
// one application per layer. Every output column has at most T nonzeros.
std::pair<Matrix, ListaTrace> lista_forward(const Matrix& Y,
                                            const ModelState& state);

// Gradients of a scalar loss w.r.t. each B^(t) given d(loss)/dG of the
// final layer, under the fixed-support convention (forward masks treated
// as constants).
std::vector<Matrix> lista_backward(const ListaTrace& trace,
                                   const ModelState& state, const Matrix& Y,
                                   const Matrix& upstream_grad);

}  // namespace sdl
