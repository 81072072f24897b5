// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "gmae/masking.hpp"
#include "gmae/nn.hpp"
#include "gmae/patches.hpp"
#include "gmae/types.hpp"

namespace gmae {

struct ModelConfig {
  int image_size = 64;
  int patch_size = 8;
  int enc_dim = 192;
  int enc_depth = 6;
  int enc_heads = 3;
  int dec_dim = 256;
  int dec_depth = 4;
  int dec_heads = 8;
  int queries = 512;         // number of Gaussians predicted
  double scale_clamp = 1.0;  // upper bound c for activated scales

  PatchGrid grid() const { return {image_size, image_size, patch_size}; }
  int tokens() const { return grid().count(); }
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

class GmaeModel;

// Per-sample gradient buffer mirroring the model's parameter tree.  Each
// worker owns one, so backward passes never share mutable state.
struct ModelGrads {
  nn::Linear::Grads patch_embed;
  std::vector<nn::Block::Grads> enc_blocks;
  nn::LayerNorm::Grads enc_norm;
  nn::Linear::Grads embed;
  Mat queries;
  std::vector<nn::Block::Grads> dec_blocks;
  nn::LayerNorm::Grads dec_norm;
  nn::Linear::Grads head;

  explicit ModelGrads(const GmaeModel& model);
  void zero();
  // Same order as GmaeModel::collect_params().
  std::vector<Mat*> collect();
  void add(const ModelGrads& other);
  void scale(double factor);
};

// Per-call activation caches; forward() fills them, backward() reads them.
// Reuse one Workspace per worker to amortize allocations.
struct Workspace {
  MaskSpec mask;
  nn::Linear::Cache patch_c;
  std::vector<nn::Block::Cache> enc_c;
  nn::LayerNorm::Cache enc_norm_c;
  Mat latents;  // n x enc_dim encoder output
  nn::Linear::Cache embed_c;
  std::vector<nn::Block::Cache> dec_c;
  nn::LayerNorm::Cache dec_norm_c;
  nn::Linear::Cache head_c;
};

// Masked autoencoder over image patches whose decoder emits raw Gaussian
// parameters from learned query tokens.
//
// encode: embed visible patches (+ fixed sin-cos positions), run the
//   encoder blocks, final LayerNorm.
// decode: project latents to the decoder width, re-add positions for the
//   visible slots, append the learned queries, run the decoder blocks,
//   LayerNorm, then map the query rows through the head to queries x 14.
class GmaeModel {
 public:
  explicit GmaeModel(const ModelConfig& cfg, uint64_t seed = 0);

  const ModelConfig& config() const { return cfg_; }

  Mat encode(const Mat& all_tokens, const MaskSpec& mask, Workspace& ws) const;
  Mat decode(const Mat& latents, const MaskSpec& mask, Workspace& ws) const;
  Mat forward(const Image& img, const MaskSpec& mask, Workspace& ws) const;

  // d loss / d raw output -> accumulate parameter gradients.  ws must hold
  // the caches of the matching forward call.
  void backward(const Mat& d_raw, const Workspace& ws, ModelGrads& g) const;

  // Named parameter handles in a fixed order (the registry order used by
  // the optimizer, checkpoints and gradient buffers).
  std::vector<ParamRef> collect_params();
  std::vector<ParamRef> collect_params() const;

  // Model pieces are public: the trainer, checkpoints and tests address
  // them through collect_params(), nothing here is hidden state.
  nn::Linear patch_embed;
  std::vector<nn::Block> enc_blocks;
  nn::LayerNorm enc_norm;
  nn::Linear embed;  // enc_dim -> dec_dim latent projection
  Mat queries;       // queries x dec_dim, learned
  std::vector<nn::Block> dec_blocks;
  nn::LayerNorm dec_norm;
  nn::Linear head;  // dec_dim -> 14

  Mat enc_pos;  // tokens x enc_dim, fixed
  Mat dec_pos;  // tokens x dec_dim, fixed

 private:
  ModelConfig cfg_;
};

}  // namespace gmae
