// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "gmae/model.hpp"
#include "gmae/renderer.hpp"
#include "gmae/trainer.hpp"
#include "gmae/zeroshot.hpp"

namespace gmae {

struct ZeroshotConfig {
  int layers = 16;
  double threshold = 0.05;
  GroupMode mode = GroupMode::kEqualCount;
};

// Everything a run needs.  The camera image size always tracks
// model.image_size and is not independently configurable.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  CameraConfig camera;
  ZeroshotConfig zeroshot;

  void sync() { camera.height = camera.width = model.image_size; }
  void validate() const;
};

// Named presets: "desk" (the defaults above), "smoke" (light decoder for
// quick corpus training), "overfit" (single-image fitting recipe).
RunConfig preset_config(const std::string& name);

// Flat key=value files: one dotted key per line, '#' comments, blank lines
// ignored.  Unknown keys and malformed values throw with the key named.
RunConfig parse_config_file(const std::string& path);
void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value);
std::string dump_config(const RunConfig& cfg);

const char* to_string(GroupMode mode);
GroupMode group_mode_from_string(const std::string& name);

}  // namespace gmae
