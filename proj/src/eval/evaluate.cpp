#include "eval/evaluate.hpp"

#include <algorithm>
#include <sstream>

#include "encoders/topk_lista.hpp"

namespace sdl {

Matrix encode_test(const Matrix& Y_test, const ModelState& state,
                   const FistaConfig& cfg) {
  require(Y_test.rows() == state.d(), "encode_test: feature dim mismatch");
  if (state.encoder_kind == EncoderKind::TopKLista)
    return lista_forward(Y_test, state).first;
  return fista_lasso(Y_test, state.D, state.hp.lambda, state.hp.mu_G, cfg).G;
}

std::vector<int> classify(const Matrix& G_test, const Matrix& W) {
  require(W.cols() == G_test.rows(), "classify: W cols != G rows");
  const Matrix scores = W * G_test;
  std::vector<int> out(static_cast<size_t>(G_test.cols()));
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    int best = 0;
    for (Eigen::Index c = 1; c < scores.rows(); ++c)
      if (scores(c, j) > scores(best, j)) best = static_cast<int>(c);
    out[static_cast<size_t>(j)] = best;
  }
  return out;
}

Metrics metrics(const std::vector<int>& pred, const std::vector<int>& truth,
                const Matrix& G_test) {
  if (pred.size() != truth.size())
    throw DimensionError("metrics: pred/truth length mismatch");
  if (pred.empty()) throw DataError("metrics: empty prediction vector");

  Metrics m;
  const int C =
      1 + *std::max_element(truth.begin(), truth.end());
  m.per_class.assign(static_cast<size_t>(C), 0.0);
  m.per_class_count.assign(static_cast<size_t>(C), 0);
  long correct = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const auto c = static_cast<size_t>(truth[i]);
    ++m.per_class_count[c];
    if (pred[i] == truth[i]) {
      ++correct;
      m.per_class[c] += 1.0;
    }
  }
  for (size_t c = 0; c < m.per_class.size(); ++c)
    if (m.per_class_count[c] > 0) m.per_class[c] /= m.per_class_count[c];
  m.top1 = static_cast<double>(correct) / static_cast<double>(pred.size());
  m.mean_nonzeros =
      static_cast<double>((G_test.array() != 0.0).count()) / G_test.cols();
  return m;
}

std::string Metrics::to_text() const {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << "top1_accuracy " << top1 << "\n";
  os << "mean_nonzeros_per_column " << mean_nonzeros << "\n";
  for (size_t c = 0; c < per_class.size(); ++c)
    os << "class " << c << " accuracy " << per_class[c] << " (n="
       << per_class_count[c] << ")\n";
  return os.str();
}

}  // namespace sdl
