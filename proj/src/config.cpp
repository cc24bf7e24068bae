#include "contrasum/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <unordered_map>

#include "contrasum/errors.hpp"

namespace contrasum {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw ConfigError("config: bad value '" + value + "' for key '" + key +
                    "'");
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  // stoull tolerates signs and whitespace; manifests must not, or negative
  // counts would silently wrap around.
  if (value.empty() ||
      value.find_first_not_of("0123456789") != std::string::npos) {
    bad_value(key, value);
  }
  try {
    size_t used = 0;
    const uint64_t v = std::stoull(value, &used, 10);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value);
  }
}

size_t parse_size(const std::string& key, const std::string& value) {
  return static_cast<size_t>(parse_u64(key, value));
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const int v = std::stoi(value, &used, 10);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value);
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value);
  }
}

bool valid_aug_kind(const std::string& s) {
  return s == "RI" || s == "RS" || s == "RD" || s == "DR" || s == "none";
}

}  // namespace

RunConfig RunConfig::for_preset(const std::string& name) {
  if (name == "desk") {
    RunConfig cfg;  // field initializers are the desk-scale defaults
    cfg.preset = "desk";
    return cfg;
  }
  if (name == "paper") {
    RunConfig cfg;
    cfg.preset = "paper";
    cfg.vocab_max_size = 50000;
    cfg.enc_layers = 12;
    cfg.dec_layers = 6;
    cfg.heads = 16;
    cfg.d_model = 1024;
    cfg.d_ff = 4096;
    cfg.d_proj = 128;
    cfg.max_src_len = 1024;
    cfg.max_tgt_len = 128;
    cfg.freeze_layers = 6;
    cfg.batch_size = 16;
    cfg.lr = 5e-7;
    return cfg;
  }
  throw ConfigError("unknown preset '" + name + "' (expected desk or paper)");
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "preset") {
    for_preset(value);  // name validation only
    preset = value;
  } else if (key == "seed") {
    seed = parse_u64(key, value);
  } else if (key == "vocab_max_size") {
    vocab_max_size = parse_size(key, value);
  } else if (key == "vocab_min_freq") {
    vocab_min_freq = parse_int(key, value);
  } else if (key == "enc_layers") {
    enc_layers = parse_size(key, value);
  } else if (key == "dec_layers") {
    dec_layers = parse_size(key, value);
  } else if (key == "heads") {
    heads = parse_size(key, value);
  } else if (key == "d_model") {
    d_model = parse_size(key, value);
  } else if (key == "d_ff") {
    d_ff = parse_size(key, value);
  } else if (key == "d_proj") {
    d_proj = parse_size(key, value);
  } else if (key == "max_src_len") {
    max_src_len = parse_size(key, value);
  } else if (key == "max_tgt_len") {
    max_tgt_len = parse_size(key, value);
  } else if (key == "freeze_layers") {
    freeze_layers = parse_size(key, value);
  } else if (key == "alpha") {
    alpha = parse_double(key, value);
  } else if (key == "tau") {
    tau = parse_double(key, value);
  } else if (key == "batch_size") {
    batch_size = parse_size(key, value);
  } else if (key == "epochs") {
    epochs = parse_size(key, value);
  } else if (key == "lr") {
    lr = parse_double(key, value);
  } else if (key == "aug1_kind") {
    aug1_kind = value;
  } else if (key == "aug1_n") {
    aug1_n = parse_int(key, value);
  } else if (key == "aug2_kind") {
    aug2_kind = value;
  } else if (key == "aug2_n") {
    aug2_n = parse_int(key, value);
  } else if (key == "gen_loss_source") {
    gen_loss_source = value;
  } else if (key == "train_path") {
    train_path = value;
  } else if (key == "val_path") {
    val_path = value;
  } else if (key == "test_path") {
    test_path = value;
  } else if (key == "vocab_path") {
    vocab_path = value;
  } else if (key == "checkpoint_path") {
    checkpoint_path = value;
  } else if (key == "out_dir") {
    out_dir = value;
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

RunConfig RunConfig::load(const std::string& path,
                          const std::string& preset_flag) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string file_preset;
  std::string line;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ": line " + std::to_string(lineno) +
                        ": expected key=value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(path + ": line " + std::to_string(lineno) +
                        ": empty key");
    }
    if (key == "preset") file_preset = value;
    entries.emplace_back(key, value);
  }
  const std::string effective =
      !preset_flag.empty() ? preset_flag
                           : (!file_preset.empty() ? file_preset : "desk");
  RunConfig cfg = for_preset(effective);
  for (const auto& [key, value] : entries) {
    if (key == "preset") continue;  // already resolved
    cfg.set(key, value);
  }
  return cfg;
}

std::string RunConfig::to_manifest() const {
  std::string out;
  auto put = [&](const std::string& key, const std::string& value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  };
  auto put_f = [&](const std::string& key, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    put(key, buf);
  };
  put("preset", preset);
  put("seed", std::to_string(seed));
  put("vocab_max_size", std::to_string(vocab_max_size));
  put("vocab_min_freq", std::to_string(vocab_min_freq));
  put("enc_layers", std::to_string(enc_layers));
  put("dec_layers", std::to_string(dec_layers));
  put("heads", std::to_string(heads));
  put("d_model", std::to_string(d_model));
  put("d_ff", std::to_string(d_ff));
  put("d_proj", std::to_string(d_proj));
  put("max_src_len", std::to_string(max_src_len));
  put("max_tgt_len", std::to_string(max_tgt_len));
  put("freeze_layers", std::to_string(freeze_layers));
  put_f("alpha", alpha);
  put_f("tau", tau);
  put("batch_size", std::to_string(batch_size));
  put("epochs", std::to_string(epochs));
  put_f("lr", lr);
  put("aug1_kind", aug1_kind);
  put("aug1_n", std::to_string(aug1_n));
  put("aug2_kind", aug2_kind);
  put("aug2_n", std::to_string(aug2_n));
  put("gen_loss_source", gen_loss_source);
  put("train_path", train_path);
  put("val_path", val_path);
  put("test_path", test_path);
  put("vocab_path", vocab_path);
  put("checkpoint_path", checkpoint_path);
  put("out_dir", out_dir);
  return out;
}

void RunConfig::check_semantics() const {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  if (preset != "desk" && preset != "paper") {
    fail("preset must be desk or paper");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail("alpha must be in [0, 1]");
  if (!(tau > 0.0)) fail("tau must be positive");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (epochs < 1) fail("epochs must be >= 1");
  if (!(lr > 0.0)) fail("lr must be positive");
  if (vocab_max_size < 4) fail("vocab_max_size must be at least 4");
  if (vocab_min_freq < 1) fail("vocab_min_freq must be >= 1");
  if (enc_layers < 1) fail("enc_layers must be >= 1");
  if (dec_layers < 1) fail("dec_layers must be >= 1");
  if (heads < 1) fail("heads must be >= 1");
  if (d_model < 1 || d_model % heads != 0) {
    fail("d_model must be positive and divisible by heads");
  }
  if (d_ff < 1) fail("d_ff must be >= 1");
  if (d_proj < 2) fail("d_proj must be >= 2");
  if (max_src_len < 2 || max_tgt_len < 2) {
    fail("max_src_len and max_tgt_len must be >= 2 (BOS/EOS framing)");
  }
  if (freeze_layers > enc_layers) {
    fail("freeze_layers must not exceed enc_layers");
  }
  if (!valid_aug_kind(aug1_kind)) fail("aug1_kind must be RI, RS, RD, DR or none");
  if (!valid_aug_kind(aug2_kind)) fail("aug2_kind must be RI, RS, RD, DR or none");
  if (aug1_n < 1) fail("aug1_n must be >= 1");
  if (aug2_n < 1) fail("aug2_n must be >= 1");
  if (gen_loss_source != "views" && gen_loss_source != "original") {
    fail("gen_loss_source must be views or original");
  }
}

ModelConfig RunConfig::model_config(size_t vocab_size) const {
  ModelConfig m;
  m.vocab_size = vocab_size;
  m.enc_layers = enc_layers;
  m.dec_layers = dec_layers;
  m.heads = heads;
  m.d_model = d_model;
  m.d_ff = d_ff;
  m.max_src_len = max_src_len;
  m.max_tgt_len = max_tgt_len;
  m.freeze_layers = freeze_layers;
  return m;
}

TrainingConfig RunConfig::training_config() const {
  TrainingConfig t;
  t.alpha = alpha;
  t.tau = tau;
  t.batch_size = batch_size;
  t.epochs = epochs;
  t.lr = lr;
  t.seed = seed;
  t.freeze_layers = freeze_layers;
  t.gen_loss_from_views = gen_loss_source == "views";
  if (aug1_kind != "none") {
    t.aug1 = AugmentationSpec{augmentation_kind_from_string(aug1_kind),
                              aug1_n, seed};
  }
  if (aug2_kind != "none") {
    t.aug2 = AugmentationSpec{augmentation_kind_from_string(aug2_kind),
                              aug2_n, seed};
  }
  return t;
}

}  // namespace contrasum
