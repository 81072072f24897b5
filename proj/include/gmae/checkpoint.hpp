// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gmae/model.hpp"
#include "gmae/optimizer.hpp"
#include "gmae/trainer.hpp"

namespace gmae {

// Checkpoint container format, version 1:
//   bytes 0..7    magic "GMAECKPT"
//   bytes 8..11   format version, little-endian uint32
//   bytes 12..19  manifest length M, little-endian uint64
//   M bytes       JSON manifest: model/train config echo, global step, and a
//                 tensor table (name, rows, cols, dtype, offset, nbytes)
//   rest          tensor payloads, float64 little-endian, row-major,
//                 at the offsets recorded in the manifest
// Optimizer moments are stored under "adam.m/<name>" and "adam.v/<name>".

enum class CheckpointErrorKind {
  kCorruptFile,      // unreadable, bad magic, truncated, malformed manifest
  kVersionMismatch,  // well-formed but an unsupported format version
  kShapeMismatch,    // tensor missing or sized differently than the target
};

struct CheckpointError : Error {
  CheckpointErrorKind kind;
  CheckpointError(CheckpointErrorKind k, const std::string& what)
      : Error(what), kind(k) {}
};

struct Checkpoint {
  ModelConfig model_config;
  std::optional<TrainConfig> train_config;
  long global_step = 0;
  std::vector<std::pair<std::string, Mat>> tensors;

  const Mat* find(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const GmaeModel& model,
                     const AdamW* opt, long global_step,
                     const TrainConfig* train_cfg);

// Parses and validates the whole file before returning; a truncated or
// corrupt file throws without any partial result.
Checkpoint load_checkpoint(const std::string& path);

// Copies tensors into the model (and optimizer state when opt != nullptr
// and the checkpoint carries it).  Every model parameter must be present
// with an identical shape; violations name the offending tensor.  The model
// is not modified unless every check passes.
void apply_checkpoint(const Checkpoint& ckpt, GmaeModel& model, AdamW* opt);

}  // namespace gmae
