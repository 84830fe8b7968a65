#include "run/config.hpp"

#include <fstream>
#include <sstream>

namespace sdl {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("junk");
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value for " + key + ": '" + v + "'");
  }
}

long parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("junk");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer value for " + key + ": '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: bad boolean value for " + key + ": '" + v + "'");
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "features") features_path = value;
  else if (key == "labels") labels_path = value;
  else if (key == "synthetic") synthetic = parse_bool(key, value);
  else if (key == "synth_d") synth.d = static_cast<int>(parse_int(key, value));
  else if (key == "synth_n") synth.N = static_cast<int>(parse_int(key, value));
  else if (key == "synth_t") synth.T = static_cast<int>(parse_int(key, value));
  else if (key == "synth_noise_sigma") synth.noise_sigma = parse_double(key, value);
  else if (key == "synth_cluster_separation")
    synth.cluster_separation = parse_double(key, value);
  else if (key == "K") K = static_cast<int>(parse_int(key, value));
  else if (key == "num_classes")
    num_classes = static_cast<int>(parse_int(key, value));
  else if (key == "encoder") {
    if (value == "topk") encoder = EncoderKind::TopKLista;
    else if (value == "fista") encoder = EncoderKind::FistaLasso;
    else throw ConfigError("config: encoder must be 'topk' or 'fista'");
  }
  else if (key == "alpha_max") hp.alpha = parse_double(key, value);
  else if (key == "beta_max") hp.beta = parse_double(key, value);
  else if (key == "mu_A") hp.mu_A = parse_double(key, value);
  else if (key == "rho_W") hp.rho_W = parse_double(key, value);
  else if (key == "eps_D") hp.eps_D = parse_double(key, value);
  else if (key == "mu_G") hp.mu_G = parse_double(key, value);
  else if (key == "lambda") hp.lambda = parse_double(key, value);
  else if (key == "T") hp.T = static_cast<int>(parse_int(key, value));
  else if (key == "n_layers") hp.n_layers = static_cast<int>(parse_int(key, value));
  else if (key == "warmup_iters")
    hp.warmup_iters = static_cast<int>(parse_int(key, value));
  else if (key == "ramp_iters")
    hp.ramp_iters = static_cast<int>(parse_int(key, value));
  else if (key == "max_outer")
    hp.max_outer = static_cast<int>(parse_int(key, value));
  else if (key == "seed") hp.seed = parse_int(key, value);
  else if (key == "fista_max_iters")
    train_opts.fista.max_iters = static_cast<int>(parse_int(key, value));
  else if (key == "fista_rel_tol")
    train_opts.fista.rel_tol = parse_double(key, value);
  else if (key == "b_learning_rate")
    train_opts.b_train.learning_rate = parse_double(key, value);
  else if (key == "b_inner_steps")
    train_opts.b_train.inner_steps = static_cast<int>(parse_int(key, value));
  else if (key == "b_grad_clip")
    train_opts.b_train.grad_clip = parse_double(key, value);
  else if (key == "supervised_g_update")
    train_opts.supervised_g_update = parse_bool(key, value);
  else if (key == "cg_factor") train_opts.cg_factor = parse_double(key, value);
  else if (key == "warmup_encoder") {
    if (value == "auto") train_opts.warmup_encoder = WarmupEncoder::Auto;
    else if (value == "topk") train_opts.warmup_encoder = WarmupEncoder::TopK;
    else if (value == "fista") train_opts.warmup_encoder = WarmupEncoder::Fista;
    else throw ConfigError("config: warmup_encoder must be auto|topk|fista");
  }
  else if (key == "certify_iters")
    certify_iters = static_cast<int>(parse_int(key, value));
  else if (key == "certify_cg_factor")
    certify_cg_factor = parse_double(key, value);
  else throw ConfigError("config: unknown key '" + key + "'");
}

RunConfig RunConfig::parse_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) +
                        " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config: empty key or value on line " +
                        std::to_string(lineno));
    cfg.set(key, value);
  }
  cfg.finalize();
  return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_text(buf.str());
}

void RunConfig::finalize() {
  const bool files = features_path.has_value() || labels_path.has_value();
  if (synthetic && files)
    throw ConfigError("config: choose synthetic data or files, not both");
  if (!synthetic) {
    if (!features_path || !labels_path)
      throw ConfigError("config: features and labels are required "
                        "(or set synthetic = true)");
  } else {
    // synth geometry mirrors the model keys
    if (!num_classes)
      throw ConfigError("config: synthetic runs require num_classes");
    synth.K = K;
    synth.C = *num_classes;
    synth.seed = hp.seed;
    synth.validate();
  }
  if (K < 1) throw ConfigError("config: K must be >= 1");
  if (num_classes && *num_classes < 2)
    throw ConfigError("config: num_classes must be >= 2");
  hp.validate(K);
  train_opts.fista.validate();
  train_opts.b_train.validate();
  if (certify_iters < 1) throw ConfigError("config: certify_iters must be >= 1");
}

}  // namespace sdl
