#include "sdl/sdl.h"

#include <cstring>
#include <fstream>
#include <string>

#include "core/targets.hpp"
#include "eval/evaluate.hpp"
#include "run/commands.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

sdl_status status_of(const sdl::Error& e) {
  switch (sdl::exit_code_for(e)) {
    case sdl::kExitConfig: return SDL_ERR_CONFIG;
    case sdl::kExitData: return SDL_ERR_DATA;
    case sdl::kExitDivergence: return SDL_ERR_DIVERGENCE;
    case sdl::kExitCertify: return SDL_ERR_CERTIFY;
    default: return SDL_ERR_INTERNAL;
  }
}

template <typename Fn>
sdl_status guarded(Fn&& fn) {
  try {
    fn();
    return SDL_OK;
  } catch (const sdl::Error& e) {
    set_error(e.what());
    return status_of(e);
  } catch (const std::exception& e) {
    set_error(e.what());
    return SDL_ERR_INTERNAL;
  } catch (...) {
    set_error("unknown error");
    return SDL_ERR_INTERNAL;
  }
}

}  // namespace

struct sdl_matrix {
  sdl::Matrix m;
};
struct sdl_labels {
  std::vector<int> v;
};
struct sdl_config {
  sdl::RunConfig cfg;
  bool dirty = false;  // overrides applied since last finalize
};
struct sdl_model {
  sdl::ModelState state;
};
struct sdl_report {
  sdl::TrainReport report;
  std::optional<sdl::PalmCertificate> certificate;
};

extern "C" {

const char* sdl_last_error(void) { return g_last_error.c_str(); }

const char* sdl_status_name(sdl_status s) {
  switch (s) {
    case SDL_OK: return "ok";
    case SDL_ERR_INTERNAL: return "internal";
    case SDL_ERR_CONFIG: return "config";
    case SDL_ERR_DATA: return "data";
    case SDL_ERR_DIVERGENCE: return "divergence";
    case SDL_ERR_CERTIFY: return "certify";
  }
  return "unknown";
}

sdl_status sdl_matrix_create(int64_t rows, int64_t cols, const double* data,
                             sdl_matrix** out) {
  return guarded([&] {
    if (!out) throw sdl::ConfigError("out is null");
    if (rows < 1 || cols < 1)
      throw sdl::DimensionError("matrix dimensions must be >= 1");
    auto* m = new sdl_matrix{sdl::Matrix::Zero(rows, cols)};
    if (data)
      std::memcpy(m->m.data(), data,
                  sizeof(double) * static_cast<size_t>(rows * cols));
    if (!m->m.allFinite()) {
      delete m;
      throw sdl::DataError("matrix has non-finite entries");
    }
    *out = m;
  });
}

void sdl_matrix_free(sdl_matrix* m) { delete m; }
int64_t sdl_matrix_rows(const sdl_matrix* m) { return m ? m->m.rows() : 0; }
int64_t sdl_matrix_cols(const sdl_matrix* m) { return m ? m->m.cols() : 0; }
const double* sdl_matrix_data(const sdl_matrix* m) {
  return m ? m->m.data() : nullptr;
}

sdl_status sdl_features_load(const char* path, sdl_matrix** out) {
  return guarded([&] {
    if (!path || !out) throw sdl::ConfigError("null argument");
    *out = new sdl_matrix{sdl::load_features(path)};
  });
}

sdl_status sdl_features_save(const sdl_matrix* m, const char* path) {
  return guarded([&] {
    if (!m || !path) throw sdl::ConfigError("null argument");
    sdl::save_features(m->m, path);
  });
}

sdl_status sdl_labels_create(const int32_t* values, int64_t n,
                             sdl_labels** out) {
  return guarded([&] {
    if (!values || !out) throw sdl::ConfigError("null argument");
    if (n < 1) throw sdl::DataError("labels must be non-empty");
    auto* l = new sdl_labels;
    l->v.assign(values, values + n);
    *out = l;
  });
}

void sdl_labels_free(sdl_labels* l) { delete l; }
int64_t sdl_labels_count(const sdl_labels* l) {
  return l ? static_cast<int64_t>(l->v.size()) : 0;
}
const int32_t* sdl_labels_data(const sdl_labels* l) {
  static_assert(sizeof(int) == sizeof(int32_t));
  return l ? reinterpret_cast<const int32_t*>(l->v.data()) : nullptr;
}

sdl_status sdl_labels_load(const char* path, sdl_labels** out) {
  return guarded([&] {
    if (!path || !out) throw sdl::ConfigError("null argument");
    *out = new sdl_labels{sdl::load_labels(path)};
  });
}

sdl_status sdl_labels_save(const sdl_labels* l, const char* path) {
  return guarded([&] {
    if (!l || !path) throw sdl::ConfigError("null argument");
    sdl::save_labels(l->v, path);
  });
}

sdl_status sdl_synthetic_generate(int32_t d, int32_t n, int32_t k, int32_t c,
                                  int32_t t, double noise_sigma,
                                  double cluster_separation, int64_t seed,
                                  sdl_matrix** y, sdl_labels** labels,
                                  sdl_matrix** d_true, sdl_matrix** g_true) {
  return guarded([&] {
    sdl::SyntheticSpec spec;
    spec.d = d;
    spec.N = n;
    spec.K = k;
    spec.C = c;
    spec.T = t;
    spec.noise_sigma = noise_sigma;
    spec.cluster_separation = cluster_separation;
    spec.seed = seed;
    auto data = sdl::generate_synthetic(spec);
    if (y) *y = new sdl_matrix{std::move(data.Y)};
    if (labels) *labels = new sdl_labels{std::move(data.labels)};
    if (d_true) *d_true = new sdl_matrix{std::move(data.D_true)};
    if (g_true) *g_true = new sdl_matrix{std::move(data.G_true)};
  });
}

sdl_status sdl_config_load(const char* path, sdl_config** out) {
  return guarded([&] {
    if (!path || !out) throw sdl::ConfigError("null argument");
    *out = new sdl_config{sdl::RunConfig::parse_file(path), false};
  });
}

sdl_status sdl_config_parse(const char* text, sdl_config** out) {
  return guarded([&] {
    if (!text || !out) throw sdl::ConfigError("null argument");
    *out = new sdl_config{sdl::RunConfig::parse_text(text), false};
  });
}

sdl_status sdl_config_set(sdl_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    if (!cfg || !key || !value) throw sdl::ConfigError("null argument");
    cfg->cfg.set(key, value);
    cfg->dirty = true;
  });
}

void sdl_config_free(sdl_config* cfg) { delete cfg; }

namespace {

sdl::RunConfig finalized(const sdl_config* cfg) {
  sdl::RunConfig c = cfg->cfg;
  c.finalize();
  return c;
}

// When explicit data handles are passed they take precedence over the
// config's data source.
sdl::RunConfig with_inline_data(const sdl_config* cfg, const sdl_matrix* y,
                                const sdl_labels* labels) {
  sdl::RunConfig c = cfg->cfg;
  if ((y == nullptr) != (labels == nullptr))
    throw sdl::ConfigError("pass both features and labels, or neither");
  if (y) {
    c.synthetic = false;
    c.features_path.reset();
    c.labels_path.reset();
    // bypass file loading; validated below by the command layer
  }
  return c;
}

}  // namespace

sdl_status sdl_train(const sdl_config* cfg, const sdl_matrix* y,
                     const sdl_labels* labels, int32_t with_certificate,
                     sdl_model** out_model, sdl_report** out_report) {
  return guarded([&] {
    if (!cfg || !out_model || !out_report)
      throw sdl::ConfigError("null argument");
    sdl::TrainOutcome out;
    if (y && labels) {
      sdl::RunConfig c = cfg->cfg;
      if (static_cast<Eigen::Index>(labels->v.size()) != y->m.cols())
        throw sdl::DataError("label count != sample count");
      int maxl = 0;
      for (int v : labels->v) maxl = std::max(maxl, v);
      const int C = c.num_classes ? *c.num_classes : maxl + 1;
      c.hp.validate(c.K);
      const auto targets = sdl::build_targets(labels->v, c.K, C);
      if (with_certificate && c.encoder != sdl::EncoderKind::FistaLasso)
        throw sdl::ConfigError("--certify requires encoder = fista");
      auto [state, report] =
          sdl::train(y->m, targets, c.hp, c.encoder, c.train_opts);
      out.state = std::move(state);
      out.report = std::move(report);
      if (with_certificate) {
        sdl::PalmCertificate cert;
        cert.rows =
            sdl::certified_window(out.state, y->m, targets, c.certify_iters,
                                  c.certify_cg_factor, c.train_opts.fista);
        for (const auto& r : out.report.rows)
          cert.convergence.push_back(
              {r.iteration, r.alpha_t, r.beta_t, r.objective, r.delta});
        cert.monotone_pass = true;
        cert.finalize();
        out.certificate = std::move(cert);
        out.report.certified = true;
      }
    } else {
      out = sdl::run_train_command(finalized(cfg), with_certificate != 0);
    }
    auto* model = new sdl_model{std::move(out.state)};
    auto* report = new sdl_report{std::move(out.report),
                                  std::move(out.certificate)};
    *out_model = model;
    *out_report = report;
  });
}

sdl_status sdl_certify(const sdl_config* cfg, const sdl_matrix* y,
                       const sdl_labels* labels, sdl_model** out_model,
                       sdl_report** out_report, int32_t* out_passed) {
  return guarded([&] {
    if (!cfg || !out_model || !out_report || !out_passed)
      throw sdl::ConfigError("null argument");
    sdl::CertifyCommandOutcome out;
    if (y && labels) {
      sdl::RunConfig c = cfg->cfg;
      if (static_cast<Eigen::Index>(labels->v.size()) != y->m.cols())
        throw sdl::DataError("label count != sample count");
      int maxl = 0;
      for (int v : labels->v) maxl = std::max(maxl, v);
      const int C = c.num_classes ? *c.num_classes : maxl + 1;
      c.hp.validate(c.K);
      const auto targets = sdl::build_targets(labels->v, c.K, C);
      sdl::CertifyOptions copts;
      copts.train = c.train_opts;
      copts.certify_iters = c.certify_iters;
      copts.cg_factor = c.certify_cg_factor;
      out.outcome = sdl::run_certify(y->m, targets, c.hp, copts);
      out.passed = out.outcome.certificate.pass;
    } else {
      out = sdl::run_certify_command(finalized(cfg));
    }
    *out_model = new sdl_model{std::move(out.outcome.state)};
    *out_report = new sdl_report{std::move(out.outcome.report),
                                 std::move(out.outcome.certificate)};
    *out_passed = out.passed ? 1 : 0;
  });
}

sdl_status sdl_model_save(const sdl_model* m, const char* path) {
  return guarded([&] {
    if (!m || !path) throw sdl::ConfigError("null argument");
    sdl::save_model(m->state, path);
  });
}

sdl_status sdl_model_load(const char* path, sdl_model** out) {
  return guarded([&] {
    if (!path || !out) throw sdl::ConfigError("null argument");
    *out = new sdl_model{sdl::load_model(path)};
  });
}

void sdl_model_free(sdl_model* m) { delete m; }
int64_t sdl_model_feature_dim(const sdl_model* m) {
  return m ? m->state.d() : 0;
}
int64_t sdl_model_atom_count(const sdl_model* m) { return m ? m->state.K() : 0; }
int64_t sdl_model_class_count(const sdl_model* m) {
  return m ? m->state.C() : 0;
}
int32_t sdl_model_encoder(const sdl_model* m) {
  return m ? static_cast<int32_t>(m->state.encoder_kind) : -1;
}

sdl_status sdl_model_encode(const sdl_model* m, const sdl_matrix* y,
                            sdl_matrix** out_codes) {
  return guarded([&] {
    if (!m || !y || !out_codes) throw sdl::ConfigError("null argument");
    *out_codes = new sdl_matrix{sdl::encode_test(y->m, m->state)};
  });
}

sdl_status sdl_model_classify(const sdl_model* m, const sdl_matrix* codes,
                              sdl_labels** out_pred) {
  return guarded([&] {
    if (!m || !codes || !out_pred) throw sdl::ConfigError("null argument");
    *out_pred = new sdl_labels{sdl::classify(codes->m, m->state.W)};
  });
}

sdl_status sdl_model_evaluate(const sdl_model* m, const sdl_matrix* y,
                              const sdl_labels* truth, char** out_metrics_text,
                              double* out_top1) {
  return guarded([&] {
    if (!m || !y || !truth) throw sdl::ConfigError("null argument");
    if (static_cast<Eigen::Index>(truth->v.size()) != y->m.cols())
      throw sdl::DataError("label count != sample count");
    if (y->m.rows() != m->state.d())
      throw sdl::DimensionError("feature dimension != model dimension");
    const sdl::Matrix G = sdl::encode_test(y->m, m->state);
    const auto pred = sdl::classify(G, m->state.W);
    const auto met = sdl::metrics(pred, truth->v, G);
    if (out_top1) *out_top1 = met.top1;
    if (out_metrics_text) {
      const std::string text = met.to_text();
      char* buf = new char[text.size() + 1];
      std::memcpy(buf, text.c_str(), text.size() + 1);
      *out_metrics_text = buf;
    }
  });
}

void sdl_report_free(sdl_report* r) { delete r; }
int64_t sdl_report_iterations(const sdl_report* r) {
  return r ? static_cast<int64_t>(r->report.rows.size()) : 0;
}
int32_t sdl_report_certificate_passed(const sdl_report* r) {
  if (!r || !r->certificate) return -1;
  return r->certificate->pass ? 1 : 0;
}

sdl_status sdl_report_write_text(const sdl_report* r, const char* path) {
  return guarded([&] {
    if (!r || !path) throw sdl::ConfigError("null argument");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw sdl::IoError(std::string("cannot open ") + path);
    os << r->report.to_text();
    if (r->certificate) os << r->certificate->to_text();
    if (!os) throw sdl::IoError(std::string("write failed: ") + path);
  });
}

sdl_status sdl_report_write_json(const sdl_report* r, const char* path) {
  return guarded([&] {
    if (!r || !path) throw sdl::ConfigError("null argument");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw sdl::IoError(std::string("cannot open ") + path);
    if (r->certificate) {
      // single JSON document with both sections
      os << "{\n\"report\": " << r->report.to_json()
         << ",\n\"certificate\": " << r->certificate->to_json() << "\n}\n";
    } else {
      os << r->report.to_json();
    }
    if (!os) throw sdl::IoError(std::string("write failed: ") + path);
  });
}

void sdl_string_free(char* s) { delete[] s; }

}  // extern "C"
