#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "contrasum/commands.hpp"
#include "contrasum/config.hpp"
#include "contrasum/errors.hpp"

namespace {

// Flags shared by every config-driven subcommand.
struct CommonFlags {
  std::string config_path;
  std::string preset;
  std::string out_dir;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path,
                  "key=value config file; omitted keys fall back to the "
                  "preset");
  cmd->add_option("--preset", flags.preset,
                  "base preset (desk or paper); overrides the file's preset "
                  "key");
  flags.seed_opt =
      cmd->add_option("--seed", flags.seed, "override the master seed");
  flags.out_opt =
      cmd->add_option("--out", flags.out_dir, "output directory override");
}

contrasum::RunConfig resolve(const CommonFlags& flags) {
  contrasum::RunConfig cfg =
      flags.config_path.empty()
          ? contrasum::RunConfig::for_preset(
                flags.preset.empty() ? "desk" : flags.preset)
          : contrasum::RunConfig::load(flags.config_path, flags.preset);
  if (flags.seed_opt->count() > 0) cfg.seed = flags.seed;
  if (flags.out_opt->count() > 0) cfg.out_dir = flags.out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contrasum: seq2seq summarizer trained jointly with a "
               "contrastive objective over document augmentations"};
  app.require_subcommand(1);

  CommonFlags train_flags, eval_flags, augment_flags, robust_flags,
      ablate_flags;
  CLI::App* train = app.add_subcommand(
      "train", "train a model and write checkpoints, loss curve and vocab");
  add_common(train, train_flags);
  CLI::App* eval = app.add_subcommand(
      "eval", "score a checkpoint on a test corpus with greedy decoding");
  add_common(eval, eval_flags);
  CLI::App* augment = app.add_subcommand(
      "augment", "emit the two augmented views per training document");
  add_common(augment, augment_flags);
  CLI::App* robustness = app.add_subcommand(
      "robustness", "eval plus top/bottom-decile subpopulation slices");
  add_common(robustness, robust_flags);
  CLI::App* ablate = app.add_subcommand(
      "ablate", "train and score every cell of a small ablation grid");
  add_common(ablate, ablate_flags);
  std::string grid;
  ablate->add_option("--grid", grid, "which grid to sweep")
      ->required()
      ->check(CLI::IsMember({"augmentation-pairs", "n-ops", "freeze-layers"}));

  CLI::App* rouge = app.add_subcommand(
      "rouge", "score line-aligned candidate and reference files");
  std::string cand_path, ref_path, rouge_out;
  rouge->add_option("candidates", cand_path, "candidate summaries, one per line")
      ->required();
  rouge->add_option("references", ref_path, "reference summaries, one per line")
      ->required();
  rouge->add_option("--out", rouge_out, "also write scores as CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) return contrasum::cmd_train(resolve(train_flags));
    if (eval->parsed()) return contrasum::cmd_eval(resolve(eval_flags));
    if (augment->parsed())
      return contrasum::cmd_augment(resolve(augment_flags));
    if (robustness->parsed())
      return contrasum::cmd_robustness(resolve(robust_flags));
    if (ablate->parsed())
      return contrasum::cmd_ablate(resolve(ablate_flags), grid);
    if (rouge->parsed())
      return contrasum::cmd_rouge(cand_path, ref_path, rouge_out);
  } catch (const contrasum::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
