#include "encoders/topk_lista.hpp"

#include <algorithm>
#include <numeric>

namespace sdl {

Vector topk_shrink(const Vector& v, int T) {
  const Eigen::Index K = v.size();
  if (T < 1 || T > K)
    throw ConfigError("topk_shrink: T out of range [1, K]");

  std::vector<Eigen::Index> nz;
  nz.reserve(static_cast<size_t>(K));
  for (Eigen::Index i = 0; i < K; ++i)
    if (v[i] != 0.0) nz.push_back(i);

  const size_t keep = std::min<size_t>(static_cast<size_t>(T), nz.size());
  std::partial_sort(nz.begin(), nz.begin() + static_cast<std::ptrdiff_t>(keep),
                    nz.end(), [&](Eigen::Index a, Eigen::Index b) {
                      const double ma = std::abs(v[a]), mb = std::abs(v[b]);
                      return ma != mb ? ma > mb : a < b;
                    });
  Vector out = Vector::Zero(K);
  for (size_t i = 0; i < keep; ++i) out[nz[i]] = v[nz[i]];
  return out;
}

std::pair<Matrix, ListaTrace> lista_forward(const Matrix& Y,
                                            const ModelState& state) {
  if (state.encoder_kind != EncoderKind::TopKLista)
    throw ConfigError("lista_forward: encoder_kind is not TopKLista");
  const auto n_layers = static_cast<size_t>(state.hp.n_layers);
  if (state.B_stack.size() != n_layers)
    throw ConfigError("lista_forward: B_stack length != n_layers");
  require(Y.rows() == state.D.rows(), "lista_forward: Y rows != D rows");
  require_finite(Y, "Y");
  const Eigen::Index K = state.D.cols(), N = Y.cols();
  const int T = state.hp.T;
  if (T > K) throw ConfigError("lista_forward: T > K");
  for (const auto& B : state.B_stack)
    require(B.rows() == K && B.cols() == state.D.rows(),
            "lista_forward: B must be K x d");

  ListaTrace trace;
  trace.d = state.D.rows();
  trace.K = K;
  trace.N = N;
  trace.T = T;
  trace.pre.reserve(n_layers);
  trace.mask.reserve(n_layers);

  Matrix G = Matrix::Zero(K, N);
  for (size_t t = 0; t < n_layers; ++t) {
    const Matrix& B = state.B_stack[t];
    Matrix Z = B * (Y - state.D * G) + G;  // B Y + (I - B D) G
    Matrix Gn(K, N);
    for (Eigen::Index j = 0; j < N; ++j) Gn.col(j) = topk_shrink(Z.col(j), T);
    trace.pre.push_back(Z);
    trace.mask.push_back(Gn.array() != 0.0);
    G = std::move(Gn);
  }
  return {std::move(G), std::move(trace)};
}

std::vector<Matrix> lista_backward(const ListaTrace& trace,
                                   const ModelState& state, const Matrix& Y,
                                   const Matrix& upstream_grad) {
  const auto n_layers = static_cast<size_t>(state.hp.n_layers);
  if (trace.pre.size() != n_layers || state.B_stack.size() != n_layers)
    throw ConfigError("lista_backward: trace/state layer count mismatch");
  if (trace.d != state.D.rows() || trace.K != state.D.cols() ||
      trace.N != Y.cols() || trace.T != state.hp.T)
    throw ConfigError("lista_backward: trace does not match state/input");
  require(upstream_grad.rows() == trace.K && upstream_grad.cols() == trace.N,
          "lista_backward: upstream_grad must be K x N");
  require_finite(upstream_grad, "upstream_grad");

  std::vector<Matrix> grads(n_layers);
  Matrix dG = upstream_grad;
  for (size_t t = n_layers; t-- > 0;) {
    // dZ = mask .* dG;  Z = B (Y - D G_prev) + G_prev
    const Matrix dZ = trace.mask[t].select(dG, 0.0);
    const Matrix G_prev = t == 0 ? Matrix::Zero(trace.K, trace.N)
                                 : trace.layer_output(static_cast<int>(t) - 1);
    const Matrix R = Y - state.D * G_prev;
    grads[t] = dZ * R.transpose();
    if (t > 0)
      dG = dZ - state.D.transpose() * (state.B_stack[t].transpose() * dZ);
  }
  return grads;
}

}  // namespace sdl
