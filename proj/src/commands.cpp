#include "contrasum/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "contrasum/augment.hpp"
#include "contrasum/checkpoint.hpp"
#include "contrasum/corpus.hpp"
#include "contrasum/errors.hpp"
#include "contrasum/eval.hpp"
#include "contrasum/rng.hpp"
#include "contrasum/training.hpp"
#include "json.hpp"

namespace contrasum {

namespace {

namespace fs = std::filesystem;

void require_input(const std::string& path, const std::string& key) {
  if (path.empty()) {
    throw ConfigError("config: '" + key + "' is required for this command");
  }
  if (!fs::exists(path)) {
    throw ConfigError("config: '" + key + "' names a missing file: " + path);
  }
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << text;
  os.flush();
  if (!os) throw IoError("write failed for " + path);
}

void write_manifest(const RunConfig& cfg) {
  write_text(cfg.out_dir + "/manifest.cfg", cfg.to_manifest());
}

void print_scores(const std::string& title, const RougeScore& s) {
  std::printf("%s\n", title.c_str());
  std::printf("%-5s %9s %9s %9s\n", "", "P", "R", "F1");
  const std::pair<const char*, const RougeTriple*> rows[] = {
      {"RG-1", &s.rg1}, {"RG-2", &s.rg2}, {"RG-L", &s.rgl}};
  for (const auto& [name, t] : rows) {
    std::printf("%-5s %9.4f %9.4f %9.4f\n", name, t->precision, t->recall,
                t->f1);
  }
}

void write_scores_csv(const std::string& path, const RougeScore& s) {
  std::string out = "variant,precision,recall,f1\n";
  char buf[120];
  const std::pair<const char*, const RougeTriple*> rows[] = {
      {"rg1", &s.rg1}, {"rg2", &s.rg2}, {"rgl", &s.rgl}};
  for (const auto& [name, t] : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g\n", name,
                  t->precision, t->recall, t->f1);
    out += buf;
  }
  write_text(path, out);
}

struct LoadedModel {
  Vocabulary vocab;
  ModelConfig mcfg;
  ModelParameters params;
  ProjectionHead head;
};

LoadedModel load_for_eval(const RunConfig& cfg) {
  require_input(cfg.vocab_path, "vocab_path");
  require_input(cfg.checkpoint_path, "checkpoint_path");
  LoadedModel m{Vocabulary::load(cfg.vocab_path), ModelConfig{},
                ModelParameters{}, ProjectionHead{}};
  m.mcfg = cfg.model_config(m.vocab.size());
  m.params = ModelParameters::init(m.mcfg, cfg.seed);
  m.head = ProjectionHead::init(cfg.d_model, cfg.d_proj, cfg.seed);
  NamedTensors model_part, head_part;
  for (const auto& entry : load_checkpoint(cfg.checkpoint_path)) {
    if (entry.first.rfind("head.", 0) == 0) {
      head_part.push_back(entry);
    } else {
      model_part.push_back(entry);
    }
  }
  m.params.load_values(model_part);
  m.head.load_values(head_part);
  return m;
}

SentenceDocument one_view(const std::optional<AugmentationSpec>& spec,
                          const SentenceDocument& doc, size_t idx, int view) {
  if (!spec) return doc;
  AugmentationSpec s = *spec;
  s.seed = derive_seed(spec->seed, idx, static_cast<uint64_t>(view));
  return apply(s, doc);
}

}  // namespace

int cmd_train(const RunConfig& cfg) {
  cfg.check_semantics();
  require_input(cfg.train_path, "train_path");
  ensure_dir(cfg.out_dir);
  const std::vector<RawExample> corpus = load_jsonl(cfg.train_path);
  if (corpus.empty()) throw ValidationError(cfg.train_path + " is empty");

  Vocabulary vocab =
      Vocabulary::build(corpus, cfg.vocab_max_size, cfg.vocab_min_freq);
  vocab.save(cfg.out_dir + "/vocab.txt");

  const ModelConfig mcfg = cfg.model_config(vocab.size());
  const TrainingConfig tcfg = cfg.training_config();
  ModelParameters params = ModelParameters::init(mcfg, cfg.seed);
  ProjectionHead head = ProjectionHead::init(cfg.d_model, cfg.d_proj, cfg.seed);

  const std::vector<LossRecord> history =
      train(params, head, mcfg, tcfg, corpus, vocab, cfg.out_dir);
  write_loss_csv(cfg.out_dir + "/loss.csv", history);
  save_checkpoint(cfg.out_dir + "/model.ckpt", training_state(params, head));
  write_manifest(cfg);

  for (size_t e = 0; e < tcfg.epochs; ++e) {
    double sum = 0.0;
    size_t count = 0;
    for (const LossRecord& r : history) {
      if (r.epoch == e) {
        sum += r.total;
        ++count;
      }
    }
    std::printf("epoch %zu: mean loss %.6f over %zu batches\n", e + 1,
                sum / static_cast<double>(count), count);
  }
  std::printf("wrote %s/model.ckpt, loss.csv, vocab.txt, manifest.cfg\n",
              cfg.out_dir.c_str());
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  cfg.check_semantics();
  require_input(cfg.test_path, "test_path");
  LoadedModel m = load_for_eval(cfg);
  const std::vector<RawExample> corpus = load_jsonl(cfg.test_path);
  const EvalResult result =
      evaluate(m.params, m.mcfg, m.vocab, corpus, /*with_slices=*/false);
  ensure_dir(cfg.out_dir);
  write_scores_csv(cfg.out_dir + "/scores.csv", result.overall);
  write_manifest(cfg);
  print_scores("mean scores over " + std::to_string(corpus.size()) +
                   " examples",
               result.overall);
  return 0;
}

int cmd_augment(const RunConfig& cfg) {
  cfg.check_semantics();
  require_input(cfg.train_path, "train_path");
  ensure_dir(cfg.out_dir);
  const std::vector<RawExample> corpus = load_jsonl(cfg.train_path);
  const TrainingConfig tcfg = cfg.training_config();
  std::ofstream os(cfg.out_dir + "/augmented.jsonl",
                   std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + cfg.out_dir + "/augmented.jsonl");
  for (size_t idx = 0; idx < corpus.size(); ++idx) {
    const SentenceDocument doc = split_sentences(corpus[idx].document);
    SentenceDocument first, second;
    if (tcfg.aug1 && tcfg.aug2) {
      const AugmentedPair pair =
          make_pair(*tcfg.aug1, *tcfg.aug2, doc, corpus[idx].summary, idx);
      first = pair.first;
      second = pair.second;
    } else {
      first = one_view(tcfg.aug1, doc, idx, 0);
      second = one_view(tcfg.aug2, doc, idx, 1);
    }
    nlohmann::json j;
    j["view1"] = join(first);
    j["view2"] = join(second);
    j["summary"] = corpus[idx].summary;
    os << j.dump() << '\n';
  }
  os.flush();
  if (!os) throw IoError("write failed for augmented.jsonl");
  write_manifest(cfg);
  std::printf("wrote %s/augmented.jsonl (%zu pairs)\n", cfg.out_dir.c_str(),
              corpus.size());
  return 0;
}

int cmd_rouge(const std::string& cand_path, const std::string& ref_path,
              const std::string& out_dir) {
  require_input(cand_path, "candidate file");
  require_input(ref_path, "reference file");
  auto read_lines = [](const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(is, line)) lines.push_back(line);
    return lines;
  };
  const std::vector<std::string> cands = read_lines(cand_path);
  const std::vector<std::string> refs = read_lines(ref_path);
  if (cands.size() != refs.size()) {
    throw ConfigError("rouge: " + cand_path + " has " +
                      std::to_string(cands.size()) + " lines but " + ref_path +
                      " has " + std::to_string(refs.size()));
  }
  if (cands.empty()) throw ConfigError("rouge: input files are empty");
  RougeScore mean;
  auto acc = [](RougeTriple& into, const RougeTriple& t, double inv) {
    into.precision += t.precision * inv;
    into.recall += t.recall * inv;
    into.f1 += t.f1 * inv;
  };
  const double inv = 1.0 / static_cast<double>(cands.size());
  for (size_t i = 0; i < cands.size(); ++i) {
    const RougeScore s = rouge_all(cands[i], refs[i]);
    acc(mean.rg1, s.rg1, inv);
    acc(mean.rg2, s.rg2, inv);
    acc(mean.rgl, s.rgl, inv);
  }
  print_scores("mean scores over " + std::to_string(cands.size()) + " lines",
               mean);
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    write_scores_csv(out_dir + "/rouge.csv", mean);
    write_text(out_dir + "/rouge_inputs.txt",
               "candidates=" + cand_path + "\nreferences=" + ref_path + "\n");
  }
  return 0;
}

int cmd_robustness(const RunConfig& cfg) {
  cfg.check_semantics();
  require_input(cfg.test_path, "test_path");
  LoadedModel m = load_for_eval(cfg);
  const std::vector<RawExample> corpus = load_jsonl(cfg.test_path);
  const EvalResult result =
      evaluate(m.params, m.mcfg, m.vocab, corpus, /*with_slices=*/true);
  ensure_dir(cfg.out_dir);
  write_scores_csv(cfg.out_dir + "/scores.csv", result.overall);
  write_slice_csv(cfg.out_dir + "/slices.csv", result.slices);
  write_manifest(cfg);
  print_scores("mean scores over " + std::to_string(corpus.size()) +
                   " examples",
               result.overall);
  std::printf("\n%-16s %-7s %9s %9s %9s\n", "metric", "slice", "RG-1", "RG-2",
              "RG-L");
  for (const SliceScores& s : result.slices.metrics) {
    std::printf("%-16s %-7s %9.4f %9.4f %9.4f\n", s.metric.c_str(), "top",
                s.top.rg1.f1, s.top.rg2.f1, s.top.rgl.f1);
    std::printf("%-16s %-7s %9.4f %9.4f %9.4f\n", s.metric.c_str(), "bottom",
                s.bottom.rg1.f1, s.bottom.rg2.f1, s.bottom.rgl.f1);
  }
  return 0;
}

namespace {

// Trains a fresh model for one grid cell and scores it; all cell artifacts
// land in the cell's own subdirectory.
RougeScore run_ablation_cell(const RunConfig& cell,
                             const std::vector<RawExample>& train_corpus,
                             const std::vector<RawExample>& eval_corpus) {
  ensure_dir(cell.out_dir);
  Vocabulary vocab = Vocabulary::build(train_corpus, cell.vocab_max_size,
                                       cell.vocab_min_freq);
  vocab.save(cell.out_dir + "/vocab.txt");
  const ModelConfig mcfg = cell.model_config(vocab.size());
  const TrainingConfig tcfg = cell.training_config();
  ModelParameters params = ModelParameters::init(mcfg, cell.seed);
  ProjectionHead head =
      ProjectionHead::init(cell.d_model, cell.d_proj, cell.seed);
  const std::vector<LossRecord> history =
      train(params, head, mcfg, tcfg, train_corpus, vocab, cell.out_dir);
  write_loss_csv(cell.out_dir + "/loss.csv", history);
  save_checkpoint(cell.out_dir + "/model.ckpt", training_state(params, head));
  write_manifest(cell);
  const EvalResult result =
      evaluate(params, mcfg, vocab, eval_corpus, /*with_slices=*/false);
  write_scores_csv(cell.out_dir + "/scores.csv", result.overall);
  return result.overall;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(
                        static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

int cmd_ablate(const RunConfig& cfg, const std::string& grid) {
  cfg.check_semantics();
  require_input(cfg.train_path, "train_path");
  ensure_dir(cfg.out_dir);
  const std::vector<RawExample> train_corpus = load_jsonl(cfg.train_path);
  const std::vector<RawExample> eval_corpus =
      cfg.test_path.empty() ? train_corpus : load_jsonl(cfg.test_path);

  // label columns + per-cell config edits
  struct Cell {
    std::string label;  // first CSV fields, e.g. "RI,RD" or "3"
    std::string slug;   // subdirectory name
    RunConfig config;
  };
  std::vector<Cell> cells;
  std::string header;
  if (grid == "augmentation-pairs") {
    header = "a1,a2";
    const char* kinds[] = {"RI", "RD", "RS", "DR"};
    for (size_t i = 0; i < 4; ++i) {
      for (size_t j = i; j < 4; ++j) {
        RunConfig c = cfg;
        c.aug1_kind = kinds[i];
        c.aug2_kind = kinds[j];
        cells.push_back({std::string(kinds[i]) + "," + kinds[j],
                         lower(std::string(kinds[i]) + "-" + kinds[j]), c});
      }
    }
  } else if (grid == "n-ops") {
    header = "n";
    for (int n : {1, 3, 5}) {
      RunConfig c = cfg;
      c.aug1_n = n;
      c.aug2_n = n;
      cells.push_back({std::to_string(n), "n" + std::to_string(n), c});
    }
  } else if (grid == "freeze-layers") {
    header = "l";
    for (size_t l : {size_t{0}, cfg.enc_layers / 2, cfg.enc_layers}) {
      RunConfig c = cfg;
      c.freeze_layers = l;
      cells.push_back({std::to_string(l), "l" + std::to_string(l), c});
    }
  } else {
    throw ConfigError("ablate: unknown grid '" + grid +
                      "' (expected augmentation-pairs, n-ops or "
                      "freeze-layers)");
  }

  std::string csv = header + ",rg1,rg2,rgl,status\n";
  for (size_t i = 0; i < cells.size(); ++i) {
    Cell& cell = cells[i];
    cell.config.seed = derive_seed(cfg.seed, stream_tag::kAblationCell, i);
    cell.config.out_dir = cfg.out_dir + "/" + grid + "/" + cell.slug;
    char buf[160];
    try {
      const RougeScore s =
          run_ablation_cell(cell.config, train_corpus, eval_corpus);
      std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,ok\n",
                    cell.label.c_str(), s.rg1.f1, s.rg2.f1, s.rgl.f1);
      std::printf("cell %s: RG-1 %.4f RG-2 %.4f RG-L %.4f\n",
                  cell.label.c_str(), s.rg1.f1, s.rg2.f1, s.rgl.f1);
    } catch (const std::exception& e) {
      std::snprintf(buf, sizeof(buf), "%s,,,,failed\n", cell.label.c_str());
      std::fprintf(stderr, "cell %s failed: %s\n", cell.label.c_str(),
                   e.what());
    }
    csv += buf;
  }
  const std::string table_path = cfg.out_dir + "/ablate_" + grid + ".csv";
  write_text(table_path, csv);
  write_manifest(cfg);
  std::printf("wrote %s (%zu cells)\n", table_path.c_str(), cells.size());
  return 0;
}

}  // namespace contrasum
