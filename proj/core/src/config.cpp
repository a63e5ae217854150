// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "seadapt/config.hpp"

#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "seadapt/common.hpp"

namespace seadapt {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last)
    fail_config("config key '", key, "': cannot parse '", value, "'");
  return out;
}

// from_chars for double is present but strtod keeps this readable across
// libstdc++ versions; the full string must be consumed.
double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double out = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    fail_config("config key '", key, "': cannot parse '", value, "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  fail_config("config key '", key, "': expected true/false, got '", value,
              "'");
}

std::vector<int> parse_int_list(const std::string& key,
                                const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_number<int>(key, trim(item)));
  }
  if (out.empty())
    fail_config("config key '", key, "': expected a comma-separated list");
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

void resolve_against(std::filesystem::path& p,
                     const std::filesystem::path& base) {
  if (!p.empty() && p.is_relative()) p = base / p;
}

}  // namespace

ModelConfig TrainConfig::model_config(int classes) const {
  ModelConfig mc;
  mc.backbone.image_height = image_size;
  mc.backbone.image_width = image_size;
  mc.backbone.channels = channels;
  mc.backbone.patch_size = patch_size;
  mc.backbone.dim = dim;
  mc.backbone.heads = heads;
  mc.backbone.blocks = blocks;
  mc.backbone.mlp_hidden = mlp_hidden;
  mc.embed_dim = embed_dim;
  mc.classes = classes;
  mc.dropout = dropout;
  mc.disc_hidden = disc_hidden;
  return mc;
}

TrainSchedule TrainConfig::schedule() const {
  TrainSchedule s;
  s.total_epochs = epochs;
  s.adaptive_period = adaptive_period;
  s.growth_k = growth_k;
  s.lambda0 = lambda0;
  s.gamma_base = gamma;
  s.beta_base = beta;
  return s;
}

PerturbationConfig TrainConfig::perturbation() const {
  PerturbationConfig p;
  p.alternate_blocks = alternate_blocks;
  p.gamma = gamma;
  p.enabled = offsets_enabled();
  return p;
}

namespace {

template <typename... Args>
void require_config(bool condition, const Args&... args) {
  if (!condition) fail_config(args...);
}

}  // namespace

void TrainConfig::validate() const {
  require_config(!source_manifest.empty(), "config: source_manifest is required");
  require_config(!target_manifest.empty(), "config: target_manifest is required");
  require_config(epochs >= 1, "config: epochs must be at least 1, got ", epochs);
  require_config(batch_size >= 2, "config: batch_size must be at least 2, got ",
          batch_size);
  require_config(lr > 0.0, "config: lr must be positive, got ", lr);
  require_config(momentum >= 0.0 && momentum < 1.0,
          "config: momentum must be in [0,1), got ", momentum);
  require_config(alpha >= 0.0, "config: alpha must be nonnegative, got ", alpha);
  require_config(beta >= 0.0, "config: beta must be nonnegative, got ", beta);
  require_config(gamma >= 0.0 && gamma <= 1.0, "config: gamma must be in [0,1], got ",
          gamma);
  require_config(kappa >= 0.0 && kappa < 1.0, "config: kappa must be in [0,1), got ",
          kappa);
  require_config(checkpoint_every >= 1, "config: checkpoint_every must be at least 1");
  require_config(max_steps >= 0, "config: max_steps must be nonnegative");
  require_config(offset_mode == "none" || offset_mode == "input" ||
              offset_mode == "token",
          "config: offset_mode must be none, input, or token, got '",
          offset_mode, "'");
  require_config(provider == "hash" || provider == "toy-frozen",
          "config: provider must be hash or toy-frozen, got '", provider, "'");
  try {
    schedule().validate();
    model_config(2).validate();
    if (offset_mode == "token") perturbation().validate(blocks);
  } catch (const Error& e) {
    fail_config(e.what());
  }
}

void set_config_key(TrainConfig& cfg, const std::string& key,
                    const std::string& value) {
  if (key == "source_manifest") cfg.source_manifest = value;
  else if (key == "target_manifest") cfg.target_manifest = value;
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "embed_cache") cfg.embed_cache = value;
  else if (key == "resume") cfg.resume = value;
  else if (key == "provider") cfg.provider = value;
  else if (key == "provider_seed")
    cfg.provider_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "prompt_template") cfg.prompt_template = value;
  else if (key == "epochs") cfg.epochs = parse_number<int>(key, value);
  else if (key == "batch_size") cfg.batch_size = parse_number<int>(key, value);
  else if (key == "lr") cfg.lr = parse_double(key, value);
  else if (key == "momentum") cfg.momentum = parse_double(key, value);
  else if (key == "alpha") cfg.alpha = parse_double(key, value);
  else if (key == "beta") cfg.beta = parse_double(key, value);
  else if (key == "gamma") cfg.gamma = parse_double(key, value);
  else if (key == "kappa") cfg.kappa = parse_double(key, value);
  else if (key == "lambda0") cfg.lambda0 = parse_double(key, value);
  else if (key == "growth_k") cfg.growth_k = parse_double(key, value);
  else if (key == "adaptive_period")
    cfg.adaptive_period = parse_number<int>(key, value);
  else if (key == "offset_mode") cfg.offset_mode = value;
  else if (key == "alternate_blocks")
    cfg.alternate_blocks = parse_int_list(key, value);
  else if (key == "skd") cfg.skd = parse_bool(key, value);
  else if (key == "curriculum") cfg.curriculum = parse_bool(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "checkpoint_every")
    cfg.checkpoint_every = parse_number<int>(key, value);
  else if (key == "max_steps") cfg.max_steps = parse_number<long>(key, value);
  else if (key == "image_size") cfg.image_size = parse_number<int>(key, value);
  else if (key == "channels") cfg.channels = parse_number<int>(key, value);
  else if (key == "patch_size") cfg.patch_size = parse_number<int>(key, value);
  else if (key == "dim") cfg.dim = parse_number<int>(key, value);
  else if (key == "heads") cfg.heads = parse_number<int>(key, value);
  else if (key == "blocks") cfg.blocks = parse_number<int>(key, value);
  else if (key == "mlp_hidden") cfg.mlp_hidden = parse_number<int>(key, value);
  else if (key == "embed_dim") cfg.embed_dim = parse_number<int>(key, value);
  else if (key == "dropout") cfg.dropout = parse_double(key, value);
  else if (key == "disc_hidden")
    cfg.disc_hidden = parse_number<int>(key, value);
  else
    fail_config("unknown config key '", key, "'");
}

TrainConfig load_train_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail_config("cannot open config file ", file.string());

  TrainConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      fail_config(file.string(), ":", lineno, ": expected key=value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty())
      fail_config(file.string(), ":", lineno, ": empty key");
    if (!seen.insert(key).second)
      fail_config(file.string(), ":", lineno, ": duplicate key '", key, "'");
    try {
      set_config_key(cfg, key, value);
    } catch (const ConfigError& e) {
      fail_config(file.string(), ":", lineno, ": ", e.what());
    }
  }

  const auto base = std::filesystem::absolute(file).parent_path();
  resolve_against(cfg.source_manifest, base);
  resolve_against(cfg.target_manifest, base);
  resolve_against(cfg.embed_cache, base);
  resolve_against(cfg.resume, base);
  return cfg;
}

void apply_ablation(TrainConfig& cfg, const std::string& name) {
  if (name == "none" || name.empty()) return;
  if (name == "adversarial-only") {
    cfg.skd = false;
    cfg.curriculum = false;
    cfg.offset_mode = "none";
  } else if (name == "input-offset") {
    cfg.skd = false;
    cfg.curriculum = false;
    cfg.offset_mode = "input";
  } else if (name == "token-offset") {
    cfg.skd = false;
    cfg.curriculum = false;
    cfg.offset_mode = "token";
  } else if (name == "skd") {
    cfg.skd = true;
    cfg.curriculum = false;
    cfg.offset_mode = "token";
  } else if (name == "full") {
    cfg.skd = true;
    cfg.curriculum = true;
    cfg.offset_mode = "token";
  } else {
    fail_config("unknown ablation '", name,
                "'; expected adversarial-only, input-offset, token-offset, "
                "skd, or full");
  }
  cfg.ablation = name;
}

std::string config_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["source_manifest"] = cfg.source_manifest.string();
  j["target_manifest"] = cfg.target_manifest.string();
  j["out_dir"] = cfg.out_dir.string();
  j["embed_cache"] = cfg.embed_cache.string();
  j["resume"] = cfg.resume.string();
  j["provider"] = cfg.provider;
  j["provider_seed"] = cfg.provider_seed;
  j["prompt_template"] = cfg.prompt_template;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["lr"] = cfg.lr;
  j["momentum"] = cfg.momentum;
  j["alpha"] = cfg.alpha;
  j["beta"] = cfg.beta;
  j["gamma"] = cfg.gamma;
  j["kappa"] = cfg.kappa;
  j["lambda0"] = cfg.lambda0;
  j["growth_k"] = cfg.growth_k;
  j["adaptive_period"] = cfg.adaptive_period;
  j["offset_mode"] = cfg.offset_mode;
  j["alternate_blocks"] = join_ints(cfg.alternate_blocks);
  j["skd"] = cfg.skd;
  j["curriculum"] = cfg.curriculum;
  j["seed"] = cfg.seed;
  j["checkpoint_every"] = cfg.checkpoint_every;
  j["max_steps"] = cfg.max_steps;
  j["image_size"] = cfg.image_size;
  j["channels"] = cfg.channels;
  j["patch_size"] = cfg.patch_size;
  j["dim"] = cfg.dim;
  j["heads"] = cfg.heads;
  j["blocks"] = cfg.blocks;
  j["mlp_hidden"] = cfg.mlp_hidden;
  j["embed_dim"] = cfg.embed_dim;
  j["dropout"] = cfg.dropout;
  j["disc_hidden"] = cfg.disc_hidden;
  j["ablation"] = cfg.ablation;
  return j.dump();
}

}  // namespace seadapt
