// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/trainer.hpp"

#include <cmath>
#include <numeric>

#include "gmae/parallel.hpp"
#include "gmae/schedule.hpp"

namespace gmae {

namespace {

// Batch samples are accumulated in fixed chunks so that the reduction order
// (and therefore every floating-point result) is independent of the thread
// count.
constexpr long kSampleChunk = 8;

// Distinct salt spaces for the per-sample random streams.
constexpr uint64_t kSaltAugment = 1'000'000'007ULL;
constexpr uint64_t kSaltMask = 2'000'000'011ULL;
constexpr uint64_t kSaltShuffle = 3'000'000'019ULL;

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 0) throw Error("TrainConfig: epochs must be non-negative");
  if (batch_size <= 0) throw Error("TrainConfig: batch size must be positive");
  if (!(base_lr >= 0.0) || !std::isfinite(base_lr)) {
    throw Error("TrainConfig: base learning rate must be non-negative");
  }
  if (!(weight_decay >= 0.0)) {
    throw Error("TrainConfig: weight decay must be non-negative");
  }
  if (warmup_epochs < 0 || warmup_epochs > epochs) {
    throw Error("TrainConfig: warmup epochs must lie within total epochs");
  }
  if (!(mask_ratio >= 0.0) || !(mask_ratio < 1.0)) {
    throw Error("TrainConfig: mask ratio must lie in [0, 1)");
  }
  if (mask_ratio == 0.0 && loss_mode != LossMode::kAll) {
    throw Error(
        "TrainConfig: mask ratio 0 leaves no masked patches; use the "
        "all-pixel loss");
  }
}

Trainer::Trainer(GmaeModel& model, const TrainConfig& cfg,
                 const CameraConfig& cam)
    : model_(model),
      cfg_(cfg),
      cam_(cam),
      opt_(model.collect_params(),
           AdamWConfig{cfg.beta1, cfg.beta2, 1e-8, cfg.weight_decay}) {
  cfg_.validate();
  cam_.validate();
  if (cam_.height != model.config().image_size ||
      cam_.width != model.config().image_size) {
    throw Error("Trainer: camera image size does not match the model");
  }
}

long Trainer::steps_per_epoch(size_t corpus_size, int batch_size) {
  if (corpus_size == 0) throw Error("Trainer: empty corpus");
  return std::max<long>(1, static_cast<long>(corpus_size) / batch_size);
}

double Trainer::train_step(const std::vector<Image>& batch,
                           const std::vector<MaskSpec>& masks, double lr) {
  const int b = static_cast<int>(batch.size());
  if (b == 0 || masks.size() != batch.size()) {
    throw Error("train_step: batch and mask lists must align");
  }
  const PatchGrid grid = model_.config().grid();
  const ScaleClamp clamp{model_.config().scale_clamp};
  const long n_chunks = (b + kSampleChunk - 1) / kSampleChunk;

  std::vector<ModelGrads> chunk_grads;
  chunk_grads.reserve(n_chunks);
  for (long c = 0; c < n_chunks; ++c) chunk_grads.emplace_back(model_);
  std::vector<double> chunk_loss(n_chunks, 0.0);
  std::vector<int> bad_index(n_chunks, -1);

  std::vector<std::string> bad_what(n_chunks);
  parallel_chunks(b, kSampleChunk, [&](long lo, long hi) {
    const long chunk = lo / kSampleChunk;
    Workspace ws;
    for (long j = lo; j < hi; ++j) {
      const Image& img = batch[j];
      // A sample that fails (non-finite loss, or a non-finite intermediate
      // rejected deeper in the stack) marks the chunk; the step is aborted
      // after the parallel region, before any state is touched.
      try {
        Mat raw = model_.forward(img, masks[j], ws);
        RenderResult rr = render_gaussians(raw, clamp, cam_);
        const double loss =
            masked_mse(rr.out.image, img, masks[j], grid, cfg_.loss_mode);
        if (!std::isfinite(loss)) throw Error("non-finite loss");
        Image gimg =
            masked_mse_grad(rr.out.image, img, masks[j], grid, cfg_.loss_mode);
        Mat draw =
            render_backward(raw, rr.gaussians, rr.screen, cam_, clamp, gimg);
        model_.backward(draw, ws, chunk_grads[chunk]);
        chunk_loss[chunk] += loss;
      } catch (const Error& e) {
        if (bad_index[chunk] < 0) {
          bad_index[chunk] = static_cast<int>(j);
          bad_what[chunk] = e.what();
        }
      }
    }
  });

  for (long c = 0; c < n_chunks; ++c) {
    if (bad_index[c] >= 0) {
      throw TrainError("train_step: batch index " +
                           std::to_string(bad_index[c]) + ": " + bad_what[c],
                       global_step_, bad_index[c]);
    }
  }
  // Reduce in chunk order.
  double loss_sum = 0.0;
  for (long c = 0; c < n_chunks; ++c) loss_sum += chunk_loss[c];
  ModelGrads& total = chunk_grads[0];
  for (long c = 1; c < n_chunks; ++c) total.add(chunk_grads[c]);
  total.scale(1.0 / b);
  auto grad_ptrs = total.collect();
  for (const Mat* g : grad_ptrs) {
    if (!g->allFinite()) {
      throw TrainError("train_step: non-finite gradient", global_step_, -1);
    }
  }
  opt_.step(grad_ptrs, lr);
  ++global_step_;
  return loss_sum / b;
}

TrainResult Trainer::run(const std::vector<Image>& corpus,
                         const StepCallback& cb) {
  if (corpus.empty()) throw Error("Trainer: empty corpus");
  const long spe = steps_per_epoch(corpus.size(), cfg_.batch_size);
  const long total_steps = spe * cfg_.epochs;
  const long warmup_steps = spe * cfg_.warmup_epochs;
  const int tokens = model_.config().tokens();

  TrainResult result;
  result.steps_per_epoch = spe;
  result.losses.reserve(total_steps);

  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Image> batch(cfg_.batch_size);
  std::vector<MaskSpec> masks(cfg_.batch_size);

  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    Rng shuffle_rng = Rng::stream(cfg_.seed, kSaltShuffle + epoch);
    shuffle_rng.shuffle(order);
    for (long s = 0; s < spe; ++s) {
      // Per-sample streams are salted by the global sample ordinal, so a
      // resumed or re-run training consumes identical randomness.
      for (int j = 0; j < cfg_.batch_size; ++j) {
        const uint64_t ordinal =
            static_cast<uint64_t>(global_step_) * cfg_.batch_size + j;
        const size_t src =
            order[(static_cast<size_t>(s) * cfg_.batch_size + j) %
                  corpus.size()];
        Rng aug_rng = Rng::stream(cfg_.seed, kSaltAugment + ordinal);
        batch[j] = augment(corpus[src], cfg_.augment, aug_rng);
        if (cfg_.mask_ratio == 0.0) {
          masks[j] = MaskSpec::full(tokens);
        } else {
          Rng mask_rng = Rng::stream(cfg_.seed, kSaltMask + ordinal);
          masks[j] = sample_mask(tokens, cfg_.mask_ratio, mask_rng);
        }
      }
      const double lr =
          lr_schedule(global_step_, cfg_.base_lr, warmup_steps, total_steps);
      const double loss = train_step(batch, masks, lr);
      result.losses.push_back(loss);
      if (cb) cb(global_step_ - 1, epoch, lr, loss);
    }
  }
  return result;
}

Mat predict_raw(const GmaeModel& model, const Image& img,
                const MaskSpec& mask) {
  Workspace ws;
  return model.forward(img, mask, ws);
}

Image reconstruct_image(const GmaeModel& model, const Image& img,
                        double mask_ratio, uint64_t seed,
                        const CameraConfig& cam) {
  const int tokens = model.config().tokens();
  MaskSpec mask;
  if (mask_ratio == 0.0) {
    mask = MaskSpec::full(tokens);
  } else {
    Rng rng = Rng::stream(seed, kSaltMask);
    mask = sample_mask(tokens, mask_ratio, rng);
  }
  Mat raw = predict_raw(model, img, mask);
  return render_gaussians(raw, ScaleClamp{model.config().scale_clamp}, cam)
      .out.image;
}

}  // namespace gmae
