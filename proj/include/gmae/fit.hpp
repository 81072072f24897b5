// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gmae/renderer.hpp"
#include "gmae/types.hpp"

namespace gmae {

// Direct single-image fit: AdamW on one raw K x 14 tensor, full-image MSE
// against the target, no network in the loop.  This is the renderer-only
// regression path; it exercises exactly the gradients the model training
// relies on.
struct FitConfig {
  int gaussians = 512;
  long steps = 2000;
  double base_lr = 2e-2;
  long warmup_steps = 100;
  double beta1 = 0.9;
  double beta2 = 0.95;
  uint64_t seed = 0;
  double scale_clamp = 1.0;

  void validate() const;
};

using FitCallback = std::function<void(long step, double lr, double loss)>;

struct FitResult {
  Mat raw;                     // fitted K x 14 parameters
  std::vector<double> losses;  // per-step MSE, measured before each update
};

// Seeded init spreads centers across the frame and depth range, sizes scales
// for rough area equipartition, and samples colors from the target under
// each center.  Then `steps` AdamW updates (decay 0) with warmup + cosine.
FitResult fit_image(const Image& target, const FitConfig& cfg,
                    const CameraConfig& cam, const FitCallback& cb = {});

// Fitted-set container, JSON:
//   {"image_size": N, "scale_clamp": c, "gaussians": [[14 doubles], ...]}
// Doubles round-trip exactly.
struct RawFile {
  Mat raw;
  double scale_clamp = 1.0;
  int image_size = 64;
};

void save_raw_json(const RawFile& rf, const std::string& path);
RawFile load_raw_json(const std::string& path);

}  // namespace gmae
