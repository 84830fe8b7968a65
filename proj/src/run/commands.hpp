#pragma once

#include <string>

#include "eval/evaluate.hpp"
#include "run/config.hpp"

namespace sdl {

// Exit codes shared by the C API and the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitDivergence = 4,
  kExitCertify = 5,
};

int exit_code_for(const Error& e);

struct TrainOutcome {
  ModelState state;
  TrainReport report;
  std::optional<PalmCertificate> certificate;
};

// Loads (or generates) the data named by the config and trains. When
// `certify` is set the run must be the supervised convex pipeline; a
// certified window is appended after training.
TrainOutcome run_train_command(const RunConfig& cfg, bool certify);

// Writes model + reports into out_dir (model.sdlm, report.txt,
// report.json, and certificate.{txt,json} when present).
void write_train_outputs(const TrainOutcome& out, const std::string& out_dir);

struct EvalOutcome {
  Metrics m;
  std::string text;
};

EvalOutcome run_eval_command(const std::string& model_path,
                             const std::string& features_path,
                             const std::string& labels_path);

// Writes features/labels (+ optional held-out split and ground truth)
// into out_dir.
void run_synth_command(const SyntheticSpec& spec, int n_test,
                       const std::string& out_dir);

struct CertifyCommandOutcome {
  CertifyOutcome outcome;
  bool passed = false;
};

CertifyCommandOutcome run_certify_command(const RunConfig& cfg);
void write_certify_outputs(const CertifyCommandOutcome& out,
                           const std::string& out_dir);

}  // namespace sdl
