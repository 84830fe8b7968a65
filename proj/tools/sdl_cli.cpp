// Command-line driver for the sparse dictionary learning library. Links
// the public C API only; all numerics live behind libsdl.

#include <sys/stat.h>

#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "sdl/sdl.h"

namespace {

int fail(sdl_status s) {
  std::fprintf(stderr, "error (%s): %s\n", sdl_status_name(s),
               sdl_last_error());
  return static_cast<int>(s);
}

int ensure_dir(const std::string& dir) {
  struct stat st {};
  if (stat(dir.c_str(), &st) == 0) {
    if (S_ISDIR(st.st_mode)) return 0;
    std::fprintf(stderr, "error (data): %s is not a directory\n", dir.c_str());
    return SDL_ERR_DATA;
  }
  if (mkdir(dir.c_str(), 0755) != 0) {
    std::fprintf(stderr, "error (data): cannot create %s\n", dir.c_str());
    return SDL_ERR_DATA;
  }
  return 0;
}

struct ConfigGuard {
  sdl_config* cfg = nullptr;
  ~ConfigGuard() { sdl_config_free(cfg); }
};

int apply_overrides(sdl_config* cfg, const std::string& encoder,
                    const std::string& seed) {
  if (!encoder.empty()) {
    const sdl_status s = sdl_config_set(cfg, "encoder", encoder.c_str());
    if (s != SDL_OK) return fail(s);
  }
  if (!seed.empty()) {
    const sdl_status s = sdl_config_set(cfg, "seed", seed.c_str());
    if (s != SDL_OK) return fail(s);
  }
  return 0;
}

int write_outputs(const sdl_model* model, const sdl_report* report,
                  const std::string& out_dir) {
  sdl_status s = sdl_model_save(model, (out_dir + "/model.sdlm").c_str());
  if (s != SDL_OK) return fail(s);
  s = sdl_report_write_text(report, (out_dir + "/report.txt").c_str());
  if (s != SDL_OK) return fail(s);
  s = sdl_report_write_json(report, (out_dir + "/report.json").c_str());
  if (s != SDL_OK) return fail(s);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse dictionary learning toolkit (LC-KSVD2 + LISTA/FISTA)"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "train a model from a config");
  std::string train_config, train_out = "out", train_encoder, train_seed;
  bool train_certify = false;
  train->add_option("--config", train_config, "run configuration file")
      ->required();
  train->add_option("--out", train_out, "output directory");
  train->add_option("--encoder", train_encoder, "override encoder: topk|fista");
  train->add_option("--seed", train_seed, "override RNG seed");
  train->add_flag("--certify", train_certify,
                  "append a certified PALM window (fista pipeline only)");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a trained model");
  std::string eval_model, eval_features, eval_labels;
  eval->add_option("--model", eval_model, "model file")->required();
  eval->add_option("--features", eval_features, "feature file")->required();
  eval->add_option("--labels", eval_labels, "label file")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  std::int64_t synth_d = 16, synth_n = 300, synth_k = 30, synth_c = 3,
               synth_t = 3, synth_ntest = 0, synth_seed = 0;
  double synth_noise = 0.0, synth_sep = 0.0;
  std::string synth_out = "synth";
  synth->add_option("--d", synth_d, "feature dimension");
  synth->add_option("--n", synth_n, "training sample count");
  synth->add_option("--k", synth_k, "dictionary atoms");
  synth->add_option("--c", synth_c, "class count");
  synth->add_option("--t", synth_t, "true sparsity per sample");
  synth->add_option("--n-test", synth_ntest, "held-out sample count");
  synth->add_option("--noise-sigma", synth_noise, "additive noise sigma");
  synth->add_option("--cluster-separation", synth_sep,
                    "class cluster separation");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--out", synth_out, "output directory");

  // certify
  auto* certify = app.add_subcommand(
      "certify", "run the convex pipeline and emit a PALM certificate");
  std::string cert_config, cert_out = "certify_out", cert_seed;
  double cert_cg_factor = 0.0;
  certify->add_option("--config", cert_config, "run configuration file")
      ->required();
  certify->add_option("--out", cert_out, "output directory");
  certify->add_option("--seed", cert_seed, "override RNG seed");
  certify->add_option("--cg-factor", cert_cg_factor,
                      "override c_G / L_G (values < 1 violate the step "
                      "premise on purpose)");

  CLI11_PARSE(app, argc, argv);

  if (train->parsed()) {
    ConfigGuard guard;
    sdl_status s = sdl_config_load(train_config.c_str(), &guard.cfg);
    if (s != SDL_OK) return fail(s);
    if (int rc = apply_overrides(guard.cfg, train_encoder, train_seed)) return rc;

    sdl_model* model = nullptr;
    sdl_report* report = nullptr;
    s = sdl_train(guard.cfg, nullptr, nullptr, train_certify ? 1 : 0, &model,
                  &report);
    if (s != SDL_OK) return fail(s);
    if (int rc = ensure_dir(train_out)) {
      sdl_model_free(model);
      sdl_report_free(report);
      return rc;
    }
    const int rc = write_outputs(model, report, train_out);
    if (rc == 0) {
      std::printf("trained %lld iterations; outputs in %s\n",
                  static_cast<long long>(sdl_report_iterations(report)),
                  train_out.c_str());
      if (train_certify)
        std::printf("certificate: %s\n",
                    sdl_report_certificate_passed(report) == 1 ? "pass"
                                                               : "FAIL");
    }
    const bool cert_failed =
        train_certify && sdl_report_certificate_passed(report) != 1;
    sdl_model_free(model);
    sdl_report_free(report);
    if (rc != 0) return rc;
    return cert_failed ? SDL_ERR_CERTIFY : 0;
  }

  if (eval->parsed()) {
    sdl_model* model = nullptr;
    sdl_status s = sdl_model_load(eval_model.c_str(), &model);
    if (s != SDL_OK) return fail(s);
    sdl_matrix* y = nullptr;
    s = sdl_features_load(eval_features.c_str(), &y);
    if (s != SDL_OK) {
      sdl_model_free(model);
      return fail(s);
    }
    sdl_labels* truth = nullptr;
    s = sdl_labels_load(eval_labels.c_str(), &truth);
    if (s != SDL_OK) {
      sdl_matrix_free(y);
      sdl_model_free(model);
      return fail(s);
    }
    char* text = nullptr;
    double top1 = 0.0;
    s = sdl_model_evaluate(model, y, truth, &text, &top1);
    sdl_labels_free(truth);
    sdl_matrix_free(y);
    sdl_model_free(model);
    if (s != SDL_OK) return fail(s);
    std::printf("%s", text);
    sdl_string_free(text);
    return 0;
  }

  if (synth->parsed()) {
    // Generate N + n_test samples in one stream, then split, so train and
    // test share the same ground-truth dictionary.
    sdl_matrix* y = nullptr;
    sdl_labels* labels = nullptr;
    sdl_matrix* d_true = nullptr;
    sdl_matrix* g_true = nullptr;
    if (int rc = ensure_dir(synth_out)) return rc;
    sdl_status s = sdl_synthetic_generate(
        static_cast<int32_t>(synth_d),
        static_cast<int32_t>(synth_n + synth_ntest),
        static_cast<int32_t>(synth_k), static_cast<int32_t>(synth_c),
        static_cast<int32_t>(synth_t), synth_noise, synth_sep, synth_seed, &y,
        &labels, &d_true, &g_true);
    if (s != SDL_OK) return fail(s);

    auto save_slice = [&](const sdl_matrix* src, std::int64_t col0,
                          std::int64_t ncols, const std::string& path) {
      const std::int64_t rows = sdl_matrix_rows(src);
      sdl_matrix* slice = nullptr;
      sdl_status st = sdl_matrix_create(
          rows, ncols, sdl_matrix_data(src) + col0 * rows, &slice);
      if (st != SDL_OK) return st;
      st = sdl_features_save(slice, path.c_str());
      sdl_matrix_free(slice);
      return st;
    };
    auto save_label_slice = [&](std::int64_t i0, std::int64_t n,
                                const std::string& path) {
      sdl_labels* slice = nullptr;
      sdl_status st = sdl_labels_create(sdl_labels_data(labels) + i0, n, &slice);
      if (st != SDL_OK) return st;
      st = sdl_labels_save(slice, path.c_str());
      sdl_labels_free(slice);
      return st;
    };

    s = save_slice(y, 0, synth_n, synth_out + "/features.bin");
    if (s == SDL_OK) s = save_label_slice(0, synth_n, synth_out + "/labels.txt");
    if (s == SDL_OK && synth_ntest > 0) {
      s = save_slice(y, synth_n, synth_ntest, synth_out + "/test_features.bin");
      if (s == SDL_OK)
        s = save_label_slice(synth_n, synth_ntest,
                             synth_out + "/test_labels.txt");
    }
    if (s == SDL_OK)
      s = sdl_features_save(d_true, (synth_out + "/D_true.bin").c_str());
    if (s == SDL_OK)
      s = sdl_features_save(g_true, (synth_out + "/G_true.bin").c_str());
    sdl_matrix_free(y);
    sdl_labels_free(labels);
    sdl_matrix_free(d_true);
    sdl_matrix_free(g_true);
    if (s != SDL_OK) return fail(s);
    std::printf("synthetic dataset written to %s\n", synth_out.c_str());
    return 0;
  }

  if (certify->parsed()) {
    ConfigGuard guard;
    sdl_status s = sdl_config_load(cert_config.c_str(), &guard.cfg);
    if (s != SDL_OK) return fail(s);
    if (int rc = apply_overrides(guard.cfg, "", cert_seed)) return rc;
    if (cert_cg_factor != 0.0) {
      s = sdl_config_set(guard.cfg, "certify_cg_factor",
                         std::to_string(cert_cg_factor).c_str());
      if (s != SDL_OK) return fail(s);
    }

    sdl_model* model = nullptr;
    sdl_report* report = nullptr;
    int32_t passed = 0;
    s = sdl_certify(guard.cfg, nullptr, nullptr, &model, &report, &passed);
    if (s != SDL_OK) return fail(s);
    if (int rc = ensure_dir(cert_out)) {
      sdl_model_free(model);
      sdl_report_free(report);
      return rc;
    }
    const int rc = write_outputs(model, report, cert_out);
    if (rc == 0)
      std::printf("certificate: %s (outputs in %s)\n",
                  passed ? "pass" : "FAIL", cert_out.c_str());
    sdl_model_free(model);
    sdl_report_free(report);
    if (rc != 0) return rc;
    return passed ? 0 : SDL_ERR_CERTIFY;
  }

  return 0;
}
