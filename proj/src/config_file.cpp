// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/config_file.hpp"

#include <fstream>
#include <sstream>

namespace gmae {

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error("config: invalid value '" + value + "' for key '" + key + "'");
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t idx = 0;
    int v = std::stoi(value, &idx);
    if (idx != value.size()) bad_value(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value);
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t idx = 0;
    double v = std::stod(value, &idx);
    if (idx != value.size()) bad_value(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value);
  }
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    size_t idx = 0;
    unsigned long long v = std::stoull(value, &idx);
    if (idx != value.size()) bad_value(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value);
  }
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

const char* to_string(GroupMode mode) {
  return mode == GroupMode::kEqualCount ? "equal_count" : "equal_depth_width";
}

GroupMode group_mode_from_string(const std::string& name) {
  if (name == "equal_count") return GroupMode::kEqualCount;
  if (name == "equal_depth_width") return GroupMode::kEqualDepthWidth;
  throw Error("unknown group mode '" + name + "'");
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  camera.validate();
  if (camera.height != model.image_size || camera.width != model.image_size) {
    throw Error("config: camera size out of sync with model.image_size");
  }
  if (zeroshot.layers < 1) {
    throw Error("config: zeroshot.layers must be positive");
  }
  if (!(zeroshot.threshold >= 0.0)) {
    throw Error("config: zeroshot.threshold must be non-negative");
  }
}

RunConfig preset_config(const std::string& name) {
  RunConfig cfg;  // "desk" defaults come from the struct initializers
  if (name == "desk") {
    // nothing to change
  } else if (name == "smoke") {
    cfg.model.dec_dim = 192;
    cfg.model.dec_depth = 2;
    cfg.model.dec_heads = 4;
    cfg.model.queries = 64;
    cfg.train.epochs = 50;
    cfg.train.warmup_epochs = 2;
    cfg.train.base_lr = 4e-4;
  } else if (name == "overfit") {
    // Full Gaussian budget but a light decoder: single-image fitting is
    // capacity-bound by the primitive count, not decoder width.
    cfg.model.dec_dim = 192;
    cfg.model.dec_depth = 2;
    cfg.model.dec_heads = 4;
    cfg.model.queries = 512;
    cfg.train.epochs = 2000;  // one step per epoch on a one-image corpus
    cfg.train.batch_size = 1;
    cfg.train.warmup_epochs = 100;
    cfg.train.base_lr = 2e-3;
    cfg.train.mask_ratio = 0.0;
    cfg.train.loss_mode = LossMode::kAll;
    cfg.train.augment = AugmentMode::kNone;
  } else {
    throw Error("unknown preset '" + name + "'");
  }
  cfg.sync();
  return cfg;
}

void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "model.image_size") {
    cfg.model.image_size = parse_int(key, value);
  } else if (key == "model.patch_size") {
    cfg.model.patch_size = parse_int(key, value);
  } else if (key == "model.enc_dim") {
    cfg.model.enc_dim = parse_int(key, value);
  } else if (key == "model.enc_depth") {
    cfg.model.enc_depth = parse_int(key, value);
  } else if (key == "model.enc_heads") {
    cfg.model.enc_heads = parse_int(key, value);
  } else if (key == "model.dec_dim") {
    cfg.model.dec_dim = parse_int(key, value);
  } else if (key == "model.dec_depth") {
    cfg.model.dec_depth = parse_int(key, value);
  } else if (key == "model.dec_heads") {
    cfg.model.dec_heads = parse_int(key, value);
  } else if (key == "model.queries") {
    cfg.model.queries = parse_int(key, value);
  } else if (key == "model.scale_clamp") {
    cfg.model.scale_clamp = parse_double(key, value);
  } else if (key == "train.epochs") {
    cfg.train.epochs = parse_int(key, value);
  } else if (key == "train.batch_size") {
    cfg.train.batch_size = parse_int(key, value);
  } else if (key == "train.base_lr") {
    cfg.train.base_lr = parse_double(key, value);
  } else if (key == "train.weight_decay") {
    cfg.train.weight_decay = parse_double(key, value);
  } else if (key == "train.beta1") {
    cfg.train.beta1 = parse_double(key, value);
  } else if (key == "train.beta2") {
    cfg.train.beta2 = parse_double(key, value);
  } else if (key == "train.warmup_epochs") {
    cfg.train.warmup_epochs = parse_int(key, value);
  } else if (key == "train.mask_ratio") {
    cfg.train.mask_ratio = parse_double(key, value);
  } else if (key == "train.loss_mode") {
    cfg.train.loss_mode = loss_mode_from_string(value);
  } else if (key == "train.augment") {
    cfg.train.augment = augment_mode_from_string(value);
  } else if (key == "train.seed") {
    cfg.train.seed = parse_u64(key, value);
  } else if (key == "camera.z_near") {
    cfg.camera.z_near = parse_double(key, value);
  } else if (key == "camera.z_far") {
    cfg.camera.z_far = parse_double(key, value);
  } else if (key == "camera.lowpass") {
    cfg.camera.lowpass = parse_double(key, value);
  } else if (key == "camera.cutoff") {
    cfg.camera.cutoff = parse_double(key, value);
  } else if (key == "camera.background") {
    std::stringstream ss(value);
    std::string part;
    Eigen::Vector3d bg;
    int i = 0;
    while (std::getline(ss, part, ',')) {
      if (i >= 3) bad_value(key, value);
      bg(i++) = parse_double(key, trim(part));
    }
    if (i != 3) bad_value(key, value);
    cfg.camera.background = bg;
  } else if (key == "zeroshot.layers") {
    cfg.zeroshot.layers = parse_int(key, value);
  } else if (key == "zeroshot.threshold") {
    cfg.zeroshot.threshold = parse_double(key, value);
  } else if (key == "zeroshot.group_mode") {
    cfg.zeroshot.mode = group_mode_from_string(value);
  } else {
    throw Error("config: unknown key '" + key + "'");
  }
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FileError("cannot read config '" + path + "'");
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error("config: line " + std::to_string(lineno) +
                  " is not key=value: '" + t + "'");
    }
    apply_config_entry(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  cfg.sync();
  return cfg;
}

std::string dump_config(const RunConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "model.image_size = " << cfg.model.image_size << "\n"
     << "model.patch_size = " << cfg.model.patch_size << "\n"
     << "model.enc_dim = " << cfg.model.enc_dim << "\n"
     << "model.enc_depth = " << cfg.model.enc_depth << "\n"
     << "model.enc_heads = " << cfg.model.enc_heads << "\n"
     << "model.dec_dim = " << cfg.model.dec_dim << "\n"
     << "model.dec_depth = " << cfg.model.dec_depth << "\n"
     << "model.dec_heads = " << cfg.model.dec_heads << "\n"
     << "model.queries = " << cfg.model.queries << "\n"
     << "model.scale_clamp = " << cfg.model.scale_clamp << "\n"
     << "train.epochs = " << cfg.train.epochs << "\n"
     << "train.batch_size = " << cfg.train.batch_size << "\n"
     << "train.base_lr = " << cfg.train.base_lr << "\n"
     << "train.weight_decay = " << cfg.train.weight_decay << "\n"
     << "train.beta1 = " << cfg.train.beta1 << "\n"
     << "train.beta2 = " << cfg.train.beta2 << "\n"
     << "train.warmup_epochs = " << cfg.train.warmup_epochs << "\n"
     << "train.mask_ratio = " << cfg.train.mask_ratio << "\n"
     << "train.loss_mode = " << to_string(cfg.train.loss_mode) << "\n"
     << "train.augment = " << to_string(cfg.train.augment) << "\n"
     << "train.seed = " << cfg.train.seed << "\n"
     << "camera.z_near = " << cfg.camera.z_near << "\n"
     << "camera.z_far = " << cfg.camera.z_far << "\n"
     << "camera.lowpass = " << cfg.camera.lowpass << "\n"
     << "camera.cutoff = " << cfg.camera.cutoff << "\n"
     << "camera.background = " << cfg.camera.background(0) << ", "
     << cfg.camera.background(1) << ", " << cfg.camera.background(2) << "\n"
     << "zeroshot.layers = " << cfg.zeroshot.layers << "\n"
     << "zeroshot.threshold = " << cfg.zeroshot.threshold << "\n"
     << "zeroshot.group_mode = " << to_string(cfg.zeroshot.mode) << "\n";
  return os.str();
}

}  // namespace gmae
