#include "io/data_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "core/rng.hpp"

namespace sdl {

namespace {

constexpr char kFeatMagic[8] = {'S', 'D', 'L', 'F', 'E', 'A', 'T', '1'};
constexpr char kModelMagic[8] = {'S', 'D', 'L', 'M', 'O', 'D', 'L', '1'};
constexpr std::uint8_t kDtypeF32 = 0x01;

// Little-endian primitives. The artifact targets LE hosts; serialize
// through memcpy so unaligned access is never an issue.
template <typename T>
void put(std::ostream& os, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  os.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& is, const char* what) {
  char buf[sizeof(T)];
  is.read(buf, sizeof(T));
  if (is.gcount() != static_cast<std::streamsize>(sizeof(T)))
    throw IoError(std::string("truncated file while reading ") + what);
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open file: " + path);
  return is;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open file for writing: " + path);
  return os;
}

void check_magic(std::istream& is, const char (&magic)[8], const char* kind) {
  char buf[8];
  is.read(buf, 8);
  if (is.gcount() != 8 || std::memcmp(buf, magic, 8) != 0)
    throw IoError(std::string("bad magic: not a ") + kind + " file");
}

void put_matrix_f64(std::ostream& os, const Matrix& m) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(m.rows()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) put<double>(os, m(i, j));
}

Matrix get_matrix_f64(std::istream& is, const char* what,
                      std::uint32_t max_dim = 1u << 24) {
  const auto rows = get<std::uint32_t>(is, what);
  const auto cols = get<std::uint32_t>(is, what);
  if (rows == 0 || cols == 0 || rows > max_dim || cols > max_dim ||
      static_cast<std::uint64_t>(rows) * cols > (1ull << 28))
    throw IoError(std::string("implausible matrix dimensions in ") + what);
  Matrix m(rows, cols);
  for (std::uint32_t j = 0; j < cols; ++j)
    for (std::uint32_t i = 0; i < rows; ++i) m(i, j) = get<double>(is, what);
  if (!m.allFinite())
    throw DataError(std::string("non-finite entries in ") + what);
  return m;
}

}  // namespace

Matrix load_features(const std::string& path) {
  auto is = open_in(path);
  check_magic(is, kFeatMagic, "SDLFEAT1 feature");
  const auto rows = get<std::uint32_t>(is, "feature header");
  const auto cols = get<std::uint32_t>(is, "feature header");
  const auto dtype = get<std::uint8_t>(is, "feature header");
  if (dtype != kDtypeF32)
    throw IoError("unsupported feature dtype byte " + std::to_string(dtype));
  if (rows == 0 || cols == 0)
    throw IoError("feature file declares an empty matrix");
  if (static_cast<std::uint64_t>(rows) * cols > (1ull << 28))
    throw IoError("implausible feature dimensions");

  Matrix m(rows, cols);
  for (std::uint32_t j = 0; j < cols; ++j)
    for (std::uint32_t i = 0; i < rows; ++i)
      m(i, j) = static_cast<double>(get<float>(is, "feature payload"));
  // trailing bytes mean the header lied about the payload
  char extra;
  is.read(&extra, 1);
  if (is.gcount() != 0) throw IoError("feature payload longer than header");
  if (!m.allFinite()) throw DataError("feature file has non-finite entries");
  return m;
}

void save_features(const Matrix& m, const std::string& path) {
  require_finite(m, "features");
  if (m.rows() == 0 || m.cols() == 0)
    throw DataError("refusing to save an empty feature matrix");
  auto os = open_out(path);
  os.write(kFeatMagic, 8);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(m.rows()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(m.cols()));
  put<std::uint8_t>(os, kDtypeF32);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      put<float>(os, static_cast<float>(m(i, j)));
  if (!os) throw IoError("write failed: " + path);
}

std::vector<int> load_labels(const std::string& path) {
  auto is = open_in(path);
  std::vector<int> labels;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      size_t pos = 0;
      const long v = std::stol(line, &pos);
      while (pos < line.size() &&
             (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r'))
        ++pos;
      if (pos != line.size()) throw std::invalid_argument("trailing junk");
      if (v < 0 || v > INT32_MAX) throw std::out_of_range("range");
      labels.push_back(static_cast<int>(v));
    } catch (const std::exception&) {
      throw DataError("labels: bad integer on line " + std::to_string(lineno) +
                      " of " + path);
    }
  }
  if (labels.empty()) throw DataError("labels file is empty: " + path);
  return labels;
}

void save_labels(const std::vector<int>& labels, const std::string& path) {
  if (labels.empty()) throw DataError("refusing to save empty labels");
  auto os = open_out(path);
  for (int v : labels) os << v << "\n";
  if (!os) throw IoError("write failed: " + path);
}

void save_model(const ModelState& state, const std::string& path) {
  auto os = open_out(path);
  os.write(kModelMagic, 8);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(state.encoder_kind));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(state.d()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(state.K()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(state.C()));
  const auto& hp = state.hp;
  put<double>(os, hp.alpha);
  put<double>(os, hp.beta);
  put<double>(os, hp.mu_A);
  put<double>(os, hp.rho_W);
  put<double>(os, hp.eps_D);
  put<double>(os, hp.mu_G);
  put<double>(os, hp.lambda);
  put<std::int32_t>(os, hp.T);
  put<std::int32_t>(os, hp.n_layers);
  put<std::int32_t>(os, hp.warmup_iters);
  put<std::int32_t>(os, hp.ramp_iters);
  put<std::int32_t>(os, hp.max_outer);
  put<std::int64_t>(os, hp.seed);
  put_matrix_f64(os, state.D);
  put_matrix_f64(os, state.A);
  put_matrix_f64(os, state.W);
  if (state.encoder_kind == EncoderKind::TopKLista) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(state.B_stack.size()));
    for (const auto& B : state.B_stack) put_matrix_f64(os, B);
  }
  if (!os) throw IoError("write failed: " + path);
}

ModelState load_model(const std::string& path) {
  auto is = open_in(path);
  check_magic(is, kModelMagic, "SDLMODL1 model");
  ModelState s;
  const auto kind = get<std::uint8_t>(is, "model header");
  if (kind > 1)
    throw IoError("model header: unknown encoder kind " + std::to_string(kind));
  s.encoder_kind = static_cast<EncoderKind>(kind);
  const auto d = get<std::uint32_t>(is, "model header");
  const auto K = get<std::uint32_t>(is, "model header");
  const auto C = get<std::uint32_t>(is, "model header");
  auto& hp = s.hp;
  hp.alpha = get<double>(is, "model hyperparams");
  hp.beta = get<double>(is, "model hyperparams");
  hp.mu_A = get<double>(is, "model hyperparams");
  hp.rho_W = get<double>(is, "model hyperparams");
  hp.eps_D = get<double>(is, "model hyperparams");
  hp.mu_G = get<double>(is, "model hyperparams");
  hp.lambda = get<double>(is, "model hyperparams");
  hp.T = get<std::int32_t>(is, "model hyperparams");
  hp.n_layers = get<std::int32_t>(is, "model hyperparams");
  hp.warmup_iters = get<std::int32_t>(is, "model hyperparams");
  hp.ramp_iters = get<std::int32_t>(is, "model hyperparams");
  hp.max_outer = get<std::int32_t>(is, "model hyperparams");
  hp.seed = get<std::int64_t>(is, "model hyperparams");
  if (!std::isfinite(hp.alpha) || !std::isfinite(hp.beta) ||
      !std::isfinite(hp.lambda))
    throw IoError("model hyperparams are non-finite");
  s.D = get_matrix_f64(is, "model D");
  s.A = get_matrix_f64(is, "model A");
  s.W = get_matrix_f64(is, "model W");
  if (s.D.rows() != d || s.D.cols() != K || s.A.rows() != K ||
      s.A.cols() != K || s.W.rows() != C || s.W.cols() != K)
    throw IoError("model matrices disagree with header dimensions");
  if (s.encoder_kind == EncoderKind::TopKLista) {
    const auto n = get<std::uint32_t>(is, "model B_stack");
    if (n != static_cast<std::uint32_t>(hp.n_layers))
      throw IoError("model B_stack count disagrees with n_layers");
    s.B_stack.reserve(n);
    for (std::uint32_t t = 0; t < n; ++t) {
      Matrix B = get_matrix_f64(is, "model B");
      if (B.rows() != K || B.cols() != d)
        throw IoError("model B matrix has wrong shape");
      s.B_stack.push_back(std::move(B));
    }
  }
  char extra;
  is.read(&extra, 1);
  if (is.gcount() != 0) throw IoError("model payload longer than expected");
  return s;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(static_cast<std::uint64_t>(spec.seed));
  const int block = spec.K / spec.C;

  SyntheticData out;
  Matrix means(spec.d, spec.C);
  for (int c = 0; c < spec.C; ++c)
    for (int i = 0; i < spec.d; ++i) means(i, c) = rng.gaussian();

  out.D_true.resize(spec.d, spec.K);
  for (int c = 0; c < spec.C; ++c) {
    for (int j = 0; j < block; ++j) {
      Vector v(spec.d);
      for (int i = 0; i < spec.d; ++i) v[i] = rng.gaussian();
      v += spec.cluster_separation * means.col(c);
      out.D_true.col(c * block + j) = v / v.norm();
    }
  }

  out.labels.resize(static_cast<size_t>(spec.N));
  out.G_true = Matrix::Zero(spec.K, spec.N);
  std::vector<int> pool(static_cast<size_t>(block));
  for (int i = 0; i < spec.N; ++i) {
    const int c = i % spec.C;
    out.labels[static_cast<size_t>(i)] = c;
    // partial Fisher-Yates for T distinct atoms of the class block
    for (int j = 0; j < block; ++j) pool[static_cast<size_t>(j)] = j;
    for (int t = 0; t < spec.T; ++t) {
      const auto r = t + static_cast<int>(rng.below(
                             static_cast<std::uint64_t>(block - t)));
      std::swap(pool[static_cast<size_t>(t)], pool[static_cast<size_t>(r)]);
      out.G_true(c * block + pool[static_cast<size_t>(t)], i) =
          rng.uniform(0.5, 1.5);
    }
  }

  out.Y = out.D_true * out.G_true;
  if (spec.noise_sigma > 0.0) {
    for (int j = 0; j < spec.N; ++j)
      for (int i = 0; i < spec.d; ++i)
        out.Y(i, j) += spec.noise_sigma * rng.gaussian();
  }
  return out;
}

}  // namespace sdl
