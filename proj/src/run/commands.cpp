#include "run/commands.hpp"

#include <sys/stat.h>

#include <algorithm>
#include <fstream>

#include "core/targets.hpp"
#include "eval/evaluate.hpp"

namespace sdl {

namespace {

void ensure_dir(const std::string& dir) {
  struct stat st{};
  if (stat(dir.c_str(), &st) == 0) {
    if (!S_ISDIR(st.st_mode))
      throw IoError(dir + " exists and is not a directory");
    return;
  }
  if (mkdir(dir.c_str(), 0755) != 0)
    throw IoError("cannot create directory " + dir);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << content;
  if (!os) throw IoError("write failed: " + path);
}

struct LoadedData {
  Matrix Y;
  std::vector<int> labels;
  int C = 0;
};

LoadedData load_run_data(const RunConfig& cfg) {
  LoadedData d;
  if (cfg.synthetic) {
    auto synth = generate_synthetic(cfg.synth);
    d.Y = std::move(synth.Y);
    d.labels = std::move(synth.labels);
    d.C = cfg.synth.C;
    return d;
  }
  d.Y = load_features(*cfg.features_path);
  d.labels = load_labels(*cfg.labels_path);
  if (static_cast<Eigen::Index>(d.labels.size()) != d.Y.cols())
    throw DataError("label count " + std::to_string(d.labels.size()) +
                    " != sample count " + std::to_string(d.Y.cols()));
  const int max_label =
      *std::max_element(d.labels.begin(), d.labels.end());
  d.C = cfg.num_classes ? *cfg.num_classes : max_label + 1;
  if (max_label >= d.C)
    throw DataError("label " + std::to_string(max_label) +
                    " out of range for num_classes " + std::to_string(d.C));
  return d;
}

}  // namespace

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Config: return kExitConfig;
    case ErrorKind::Data:
    case ErrorKind::Dimension:
    case ErrorKind::Io: return kExitData;
    case ErrorKind::Divergence: return kExitDivergence;
    case ErrorKind::Numeric: return kExitInternal;
  }
  return kExitInternal;
}

TrainOutcome run_train_command(const RunConfig& cfg, bool certify) {
  if (certify && cfg.encoder != EncoderKind::FistaLasso)
    throw ConfigError(
        "--certify requires encoder = fista (the convergence analysis "
        "covers the convex pipeline only)");

  const auto data = load_run_data(cfg);
  const auto targets = build_targets(data.labels, cfg.K, data.C);

  TrainOutcome out;
  auto [state, report] =
      train(data.Y, targets, cfg.hp, cfg.encoder, cfg.train_opts);
  out.state = std::move(state);
  out.report = std::move(report);
  if (certify) {
    PalmCertificate cert;
    cert.rows = certified_window(out.state, data.Y, targets, cfg.certify_iters,
                                 cfg.certify_cg_factor, cfg.train_opts.fista);
    for (const auto& r : out.report.rows)
      cert.convergence.push_back(
          {r.iteration, r.alpha_t, r.beta_t, r.objective, r.delta});
    cert.monotone_pass = true;  // train() aborts on plateau increases
    cert.finalize();
    out.report.certified = true;
    out.certificate = std::move(cert);
  }
  return out;
}

void write_train_outputs(const TrainOutcome& out, const std::string& out_dir) {
  ensure_dir(out_dir);
  save_model(out.state, out_dir + "/model.sdlm");
  write_file(out_dir + "/report.txt", out.report.to_text());
  write_file(out_dir + "/report.json", out.report.to_json());
  if (out.certificate) {
    write_file(out_dir + "/certificate.txt", out.certificate->to_text());
    write_file(out_dir + "/certificate.json", out.certificate->to_json());
  }
}

EvalOutcome run_eval_command(const std::string& model_path,
                             const std::string& features_path,
                             const std::string& labels_path) {
  const ModelState state = load_model(model_path);
  const Matrix Y = load_features(features_path);
  const auto labels = load_labels(labels_path);
  if (static_cast<Eigen::Index>(labels.size()) != Y.cols())
    throw DataError("label count != sample count");
  if (Y.rows() != state.d())
    throw DimensionError("feature dimension " + std::to_string(Y.rows()) +
                         " != model dimension " + std::to_string(state.d()));
  const int max_label = *std::max_element(labels.begin(), labels.end());
  if (max_label >= state.C())
    throw DataError("label out of range for the model's class count");

  EvalOutcome out;
  const Matrix G = encode_test(Y, state);
  const auto pred = classify(G, state.W);
  out.m = metrics(pred, labels, G);
  out.text = out.m.to_text();
  return out;
}

void run_synth_command(const SyntheticSpec& spec, int n_test,
                       const std::string& out_dir) {
  if (n_test < 0) throw ConfigError("n_test must be >= 0");
  ensure_dir(out_dir);
  SyntheticSpec full = spec;
  full.N = spec.N + n_test;
  full.validate();
  const auto data = generate_synthetic(full);

  save_features(data.Y.leftCols(spec.N), out_dir + "/features.bin");
  save_labels(std::vector<int>(data.labels.begin(),
                               data.labels.begin() + spec.N),
              out_dir + "/labels.txt");
  if (n_test > 0) {
    save_features(data.Y.rightCols(n_test), out_dir + "/test_features.bin");
    save_labels(std::vector<int>(data.labels.end() - n_test,
                                 data.labels.end()),
                out_dir + "/test_labels.txt");
  }
  save_features(data.D_true, out_dir + "/D_true.bin");
  save_features(data.G_true, out_dir + "/G_true.bin");
}

CertifyCommandOutcome run_certify_command(const RunConfig& cfg) {
  const auto data = load_run_data(cfg);
  const auto targets = build_targets(data.labels, cfg.K, data.C);

  CertifyOptions copts;
  copts.train = cfg.train_opts;
  copts.certify_iters = cfg.certify_iters;
  copts.cg_factor = cfg.certify_cg_factor;
  CertifyCommandOutcome out{run_certify(data.Y, targets, cfg.hp, copts), false};
  out.passed = out.outcome.certificate.pass;
  return out;
}

void write_certify_outputs(const CertifyCommandOutcome& out,
                           const std::string& out_dir) {
  ensure_dir(out_dir);
  save_model(out.outcome.state, out_dir + "/model.sdlm");
  write_file(out_dir + "/report.txt", out.outcome.report.to_text());
  write_file(out_dir + "/report.json", out.outcome.report.to_json());
  write_file(out_dir + "/certificate.txt", out.outcome.certificate.to_text());
  write_file(out_dir + "/certificate.json", out.outcome.certificate.to_json());
}

}  // namespace sdl
