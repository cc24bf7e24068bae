#pragma once

#include <string>

#include "contrasum/config.hpp"

namespace contrasum {

// Command bodies behind the CLI. Each returns the process exit code on
// success (always 0) and reports failure by throwing: ConfigError for
// misconfiguration (mapped to exit 2) and anything else for runtime
// failures (exit 1). Every command that takes a config writes a manifest
// (a reloadable config file) into the output directory.

int cmd_train(const RunConfig& cfg);
int cmd_eval(const RunConfig& cfg);
int cmd_augment(const RunConfig& cfg);
int cmd_rouge(const std::string& cand_path, const std::string& ref_path,
              const std::string& out_dir);
int cmd_robustness(const RunConfig& cfg);

// grid: "augmentation-pairs" (10 upper-triangle kind pairs),
// "n-ops" (n in {1,3,5}) or "freeze-layers" (l in {0, enc/2, enc}).
int cmd_ablate(const RunConfig& cfg, const std::string& grid);

}  // namespace contrasum
