#pragma once

#include <optional>
#include <string>

#include "core/types.hpp"
#include "io/data_io.hpp"
#include "train/trainer.hpp"

namespace sdl {

// Flat key = value run configuration. '#' starts a comment; unknown keys
// are errors. A run takes its data either from feature/label files or
// from the built-in synthetic generator (synth_* keys); mixing both is an
// error.
struct RunConfig {
  // data
  std::optional<std::string> features_path;
  std::optional<std::string> labels_path;
  bool synthetic = false;
  SyntheticSpec synth;

  // model
  int K = 520;
  std::optional<int> num_classes;  // inferred from labels when absent
  EncoderKind encoder = EncoderKind::TopKLista;
  HyperParams hp;

  // solver and encoder-training knobs
  TrainOptions train_opts;

  // certify
  int certify_iters = 50;
  double certify_cg_factor = 1.02;

  static RunConfig parse_file(const std::string& path);
  static RunConfig parse_text(const std::string& text);

  // Applies a single typed override "key=value"; unknown key is an error.
  void set(const std::string& key, const std::string& value);
  void finalize();  // cross-field validation after all keys are set
};

}  // namespace sdl
