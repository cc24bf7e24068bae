#pragma once

#include <cstdint>
#include <string>

#include "contrasum/model.hpp"
#include "contrasum/training.hpp"

namespace contrasum {

// Resolved run configuration: a preset supplies every default, an optional
// flat key=value file overrides fields, and command-line flags override the
// file. The manifest written by each command is itself a valid config file.
struct RunConfig {
  std::string preset = "desk";
  uint64_t seed = 0;

  size_t vocab_max_size = 5000;
  int vocab_min_freq = 1;

  size_t enc_layers = 2;
  size_t dec_layers = 2;
  size_t heads = 2;
  size_t d_model = 32;
  size_t d_ff = 64;
  size_t d_proj = 16;
  size_t max_src_len = 64;
  size_t max_tgt_len = 32;
  size_t freeze_layers = 0;

  double alpha = 0.2;
  double tau = 0.5;
  size_t batch_size = 4;
  size_t epochs = 5;
  double lr = 1e-3;

  std::string aug1_kind = "RD";  // RI | RS | RD | DR | none
  int aug1_n = 1;
  std::string aug2_kind = "RS";
  int aug2_n = 1;
  std::string gen_loss_source = "views";  // views | original

  std::string train_path;
  std::string val_path;
  std::string test_path;
  std::string vocab_path;
  std::string checkpoint_path;
  std::string out_dir = "out";

  // Documented defaults. "desk" is the test-scale configuration; "paper"
  // mirrors the published hyperparameters. ConfigError on unknown names.
  static RunConfig for_preset(const std::string& name);

  // Parses a config file over the defaults of `preset_flag` (or the file's
  // own preset key, or "desk"). Lines are key=value; blank lines and lines
  // starting with '#' are skipped; unknown keys are ConfigErrors.
  static RunConfig load(const std::string& path,
                        const std::string& preset_flag = "");

  // Applies one key=value assignment. ConfigError on unknown keys or
  // unparseable values.
  void set(const std::string& key, const std::string& value);

  // Full serialization, loadable by load(); records every field.
  std::string to_manifest() const;

  // Cross-field validation with ConfigError messages naming the field.
  void check_semantics() const;

  ModelConfig model_config(size_t vocab_size) const;
  TrainingConfig training_config() const;
};

}  // namespace contrasum
