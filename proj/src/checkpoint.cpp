// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "json.hpp"

namespace gmae {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'G', 'M', 'A', 'E', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

json config_to_json(const ModelConfig& c) {
  return json{{"image_size", c.image_size}, {"patch_size", c.patch_size},
              {"enc_dim", c.enc_dim},       {"enc_depth", c.enc_depth},
              {"enc_heads", c.enc_heads},   {"dec_dim", c.dec_dim},
              {"dec_depth", c.dec_depth},   {"dec_heads", c.dec_heads},
              {"queries", c.queries},       {"scale_clamp", c.scale_clamp}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.image_size = j.at("image_size").get<int>();
  c.patch_size = j.at("patch_size").get<int>();
  c.enc_dim = j.at("enc_dim").get<int>();
  c.enc_depth = j.at("enc_depth").get<int>();
  c.enc_heads = j.at("enc_heads").get<int>();
  c.dec_dim = j.at("dec_dim").get<int>();
  c.dec_depth = j.at("dec_depth").get<int>();
  c.dec_heads = j.at("dec_heads").get<int>();
  c.queries = j.at("queries").get<int>();
  c.scale_clamp = j.at("scale_clamp").get<double>();
  return c;
}

json train_to_json(const TrainConfig& t) {
  return json{{"epochs", t.epochs},
              {"batch_size", t.batch_size},
              {"base_lr", t.base_lr},
              {"weight_decay", t.weight_decay},
              {"beta1", t.beta1},
              {"beta2", t.beta2},
              {"warmup_epochs", t.warmup_epochs},
              {"mask_ratio", t.mask_ratio},
              {"loss_mode", to_string(t.loss_mode)},
              {"augment", to_string(t.augment)},
              {"seed", t.seed}};
}

TrainConfig train_from_json(const json& j) {
  TrainConfig t;
  t.epochs = j.at("epochs").get<int>();
  t.batch_size = j.at("batch_size").get<int>();
  t.base_lr = j.at("base_lr").get<double>();
  t.weight_decay = j.at("weight_decay").get<double>();
  t.beta1 = j.at("beta1").get<double>();
  t.beta2 = j.at("beta2").get<double>();
  t.warmup_epochs = j.at("warmup_epochs").get<int>();
  t.mask_ratio = j.at("mask_ratio").get<double>();
  t.loss_mode = loss_mode_from_string(j.at("loss_mode").get<std::string>());
  t.augment = augment_mode_from_string(j.at("augment").get<std::string>());
  t.seed = j.at("seed").get<uint64_t>();
  return t;
}

void append_row_major(const Mat& m, std::string& payload) {
  std::vector<double> buf(static_cast<size_t>(m.rows()) * m.cols());
  size_t idx = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) buf[idx++] = m(i, j);
  }
  payload.append(reinterpret_cast<const char*>(buf.data()),
                 buf.size() * sizeof(double));
}

template <typename T>
void append_le(std::string& out, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  out.append(bytes, sizeof(T));
}

[[noreturn]] void corrupt(const std::string& path, const std::string& why) {
  throw CheckpointError(CheckpointErrorKind::kCorruptFile,
                        "checkpoint '" + path + "': " + why);
}

}  // namespace

const Mat* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, m] : tensors) {
    if (n == name) return &m;
  }
  return nullptr;
}

void save_checkpoint(const std::string& path, const GmaeModel& model,
                     const AdamW* opt, long global_step,
                     const TrainConfig* train_cfg) {
  auto params = model.collect_params();
  json manifest;
  manifest["format"] = "gmae-checkpoint";
  manifest["version"] = kVersion;
  manifest["global_step"] = global_step;
  manifest["model_config"] = config_to_json(model.config());
  if (train_cfg) manifest["train_config"] = train_to_json(*train_cfg);

  std::string payload;
  json table = json::array();
  auto add_tensor = [&](const std::string& name, const Mat& m) {
    table.push_back(json{{"name", name},
                         {"rows", m.rows()},
                         {"cols", m.cols()},
                         {"dtype", "f64"},
                         {"offset", payload.size()},
                         {"nbytes", static_cast<size_t>(m.rows()) * m.cols() *
                                        sizeof(double)}});
    append_row_major(m, payload);
  };
  for (const auto& p : params) add_tensor(p.name, *p.value);
  if (opt) {
    manifest["adam_t"] = opt->t();
    auto& m1 = const_cast<AdamW*>(opt)->moment1();
    auto& m2 = const_cast<AdamW*>(opt)->moment2();
    for (size_t i = 0; i < params.size(); ++i) {
      add_tensor("adam.m/" + params[i].name, m1[i]);
      add_tensor("adam.v/" + params[i].name, m2[i]);
    }
  }
  manifest["tensors"] = std::move(table);

  const std::string mstr = manifest.dump();
  std::string header;
  header.append(kMagic, sizeof(kMagic));
  append_le<uint32_t>(header, kVersion);
  append_le<uint64_t>(header, mstr.size());

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f.write(header.data(), static_cast<std::streamsize>(header.size()));
  f.write(mstr.data(), static_cast<std::streamsize>(mstr.size()));
  f.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!f) throw Error("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw FileError("cannot open checkpoint '" + path + "'");
  }
  std::string blob((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  const size_t header_size = sizeof(kMagic) + sizeof(uint32_t) +
                             sizeof(uint64_t);
  if (blob.size() < header_size) corrupt(path, "file shorter than header");
  if (std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0) {
    corrupt(path, "bad magic bytes");
  }
  uint32_t version;
  std::memcpy(&version, blob.data() + sizeof(kMagic), sizeof(version));
  if (version != kVersion) {
    throw CheckpointError(
        CheckpointErrorKind::kVersionMismatch,
        "checkpoint '" + path + "': format version " +
            std::to_string(version) + " is not supported (expected " +
            std::to_string(kVersion) + ")");
  }
  uint64_t mlen;
  std::memcpy(&mlen, blob.data() + sizeof(kMagic) + sizeof(uint32_t),
              sizeof(mlen));
  if (blob.size() < header_size + mlen) corrupt(path, "truncated manifest");
  json manifest;
  try {
    manifest = json::parse(blob.begin() + header_size,
                           blob.begin() + header_size + mlen);
  } catch (const json::exception& e) {
    corrupt(path, std::string("manifest parse error: ") + e.what());
  }

  Checkpoint ckpt;
  try {
    ckpt.global_step = manifest.at("global_step").get<long>();
    ckpt.model_config = config_from_json(manifest.at("model_config"));
    if (manifest.contains("train_config")) {
      ckpt.train_config = train_from_json(manifest.at("train_config"));
    }
    const char* base = blob.data() + header_size + mlen;
    const size_t payload_size = blob.size() - header_size - mlen;
    for (const auto& entry : manifest.at("tensors")) {
      const auto name = entry.at("name").get<std::string>();
      const auto rows = entry.at("rows").get<Eigen::Index>();
      const auto cols = entry.at("cols").get<Eigen::Index>();
      const auto offset = entry.at("offset").get<size_t>();
      const auto nbytes = entry.at("nbytes").get<size_t>();
      if (entry.at("dtype").get<std::string>() != "f64") {
        corrupt(path, "unsupported dtype for tensor " + name);
      }
      if (rows < 0 || cols < 0 ||
          nbytes != static_cast<size_t>(rows) * cols * sizeof(double) ||
          offset + nbytes > payload_size) {
        corrupt(path, "tensor '" + name + "' exceeds payload bounds");
      }
      Mat m(rows, cols);
      const double* src = reinterpret_cast<const double*>(base + offset);
      size_t idx = 0;
      for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = src[idx++];
      }
      ckpt.tensors.emplace_back(name, std::move(m));
    }
  } catch (const json::exception& e) {
    corrupt(path, std::string("malformed manifest: ") + e.what());
  }
  return ckpt;
}

void apply_checkpoint(const Checkpoint& ckpt, GmaeModel& model, AdamW* opt) {
  auto params = model.collect_params();
  auto check = [&](const std::string& name, const Mat& target) -> const Mat* {
    const Mat* src = ckpt.find(name);
    if (!src) {
      throw CheckpointError(CheckpointErrorKind::kShapeMismatch,
                            "checkpoint is missing tensor '" + name + "'");
    }
    if (src->rows() != target.rows() || src->cols() != target.cols()) {
      throw CheckpointError(
          CheckpointErrorKind::kShapeMismatch,
          "tensor '" + name + "' has shape " + std::to_string(src->rows()) +
              "x" + std::to_string(src->cols()) + ", model expects " +
              std::to_string(target.rows()) + "x" +
              std::to_string(target.cols()));
    }
    return src;
  };
  // Validate everything first so a failed load leaves the model untouched.
  std::vector<const Mat*> sources(params.size());
  for (size_t i = 0; i < params.size(); ++i) {
    sources[i] = check(params[i].name, *params[i].value);
  }
  const bool has_optim = opt && ckpt.find("adam.m/" + params[0].name);
  std::vector<const Mat*> msrc, vsrc;
  if (has_optim) {
    msrc.resize(params.size());
    vsrc.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
      msrc[i] = check("adam.m/" + params[i].name, *params[i].value);
      vsrc[i] = check("adam.v/" + params[i].name, *params[i].value);
    }
  }
  for (size_t i = 0; i < params.size(); ++i) *params[i].value = *sources[i];
  if (opt) {
    if (has_optim) {
      for (size_t i = 0; i < params.size(); ++i) {
        opt->moment1()[i] = *msrc[i];
        opt->moment2()[i] = *vsrc[i];
      }
    }
    opt->set_t(ckpt.global_step);
  }
}

}  // namespace gmae
