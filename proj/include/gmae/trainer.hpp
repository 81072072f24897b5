// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "gmae/augment.hpp"
#include "gmae/loss.hpp"
#include "gmae/model.hpp"
#include "gmae/optimizer.hpp"
#include "gmae/renderer.hpp"

namespace gmae {

struct TrainConfig {
  int epochs = 50;
  int batch_size = 64;
  double base_lr = 1e-4;
  double weight_decay = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.95;
  int warmup_epochs = 2;
  double mask_ratio = 0.75;  // 0 disables masking (full visibility)
  LossMode loss_mode = LossMode::kMasked;
  AugmentMode augment = AugmentMode::kBasic;
  uint64_t seed = 0;

  void validate() const;
};

// Raised when a step produces a non-finite loss or gradient.  The model and
// optimizer are left exactly as they were before the step.
struct TrainError : Error {
  long step;
  int batch_index;  // offending sample within the batch, -1 if unknown
  TrainError(const std::string& what, long step_, int batch_index_)
      : Error(what), step(step_), batch_index(batch_index_) {}
};

struct TrainResult {
  std::vector<double> losses;  // one entry per optimization step
  long steps_per_epoch = 0;
};

class Trainer {
 public:
  Trainer(GmaeModel& model, const TrainConfig& cfg, const CameraConfig& cam);

  // cb(step, epoch, lr, loss) fires after every step.
  using StepCallback = std::function<void(long, int, double, double)>;
  TrainResult run(const std::vector<Image>& corpus,
                  const StepCallback& cb = nullptr);

  // One optimization step on an explicit, already-augmented batch.
  double train_step(const std::vector<Image>& batch,
                    const std::vector<MaskSpec>& masks, double lr);

  AdamW& optimizer() { return opt_; }
  long global_step() const { return global_step_; }
  void set_global_step(long s) { global_step_ = s; }
  static long steps_per_epoch(size_t corpus_size, int batch_size);

 private:
  GmaeModel& model_;
  TrainConfig cfg_;
  CameraConfig cam_;
  AdamW opt_;
  long global_step_ = 0;
};

// Inference helpers.
Mat predict_raw(const GmaeModel& model, const Image& img,
                const MaskSpec& mask);
// mask_ratio 0 keeps every patch visible.
Image reconstruct_image(const GmaeModel& model, const Image& img,
                        double mask_ratio, uint64_t seed,
                        const CameraConfig& cam);

}  // namespace gmae
