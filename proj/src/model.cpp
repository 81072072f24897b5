// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/model.hpp"

#include "gmae/gaussians.hpp"
#include "gmae/pos_embed.hpp"

namespace gmae {

void ModelConfig::validate() const {
  grid().validate();
  auto check_dim = [](const char* what, int dim, int heads) {
    if (dim <= 0 || heads <= 0 || dim % heads != 0) {
      throw Error(std::string("ModelConfig: ") + what +
                  " width must be divisible by its head count");
    }
    if (dim % 4 != 0) {
      throw Error(std::string("ModelConfig: ") + what +
                  " width must be a multiple of 4 for sin-cos positions");
    }
  };
  check_dim("encoder", enc_dim, enc_heads);
  check_dim("decoder", dec_dim, dec_heads);
  if (enc_depth <= 0 || dec_depth <= 0) {
    throw Error("ModelConfig: depths must be positive");
  }
  if (queries <= 0) throw Error("ModelConfig: queries must be positive");
  if (!(scale_clamp > 0.0)) {
    throw Error("ModelConfig: scale clamp must be positive");
  }
}

GmaeModel::GmaeModel(const ModelConfig& cfg, uint64_t seed) : cfg_(cfg) {
  cfg.validate();
  const int token_dim = cfg.grid().dim();
  patch_embed = nn::Linear(token_dim, cfg.enc_dim);
  enc_blocks.assign(cfg.enc_depth, nn::Block(cfg.enc_dim, cfg.enc_heads));
  enc_norm = nn::LayerNorm(cfg.enc_dim);
  embed = nn::Linear(cfg.enc_dim, cfg.dec_dim);
  queries = Mat::Zero(cfg.queries, cfg.dec_dim);
  dec_blocks.assign(cfg.dec_depth, nn::Block(cfg.dec_dim, cfg.dec_heads));
  dec_norm = nn::LayerNorm(cfg.dec_dim);
  head = nn::Linear(cfg.dec_dim, kGaussianDim);

  const int rows = cfg.grid().rows(), cols = cfg.grid().cols();
  enc_pos = sincos_pos_embed(cfg.enc_dim, rows, cols);
  dec_pos = sincos_pos_embed(cfg.dec_dim, rows, cols);

  // Deterministic init: xavier-uniform linears in registry order, small
  // normal queries, LayerNorm at identity.
  Rng rng = Rng::stream(seed, 0x6d6f64656c);
  patch_embed.init_xavier(rng);
  for (auto& blk : enc_blocks) {
    blk.attn.qkv.init_xavier(rng);
    blk.attn.proj.init_xavier(rng);
    blk.mlp.fc1.init_xavier(rng);
    blk.mlp.fc2.init_xavier(rng);
  }
  embed.init_xavier(rng);
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    for (Eigen::Index j = 0; j < queries.cols(); ++j) {
      queries(i, j) = rng.normal(0.0, 0.02);
    }
  }
  for (auto& blk : dec_blocks) {
    blk.attn.qkv.init_xavier(rng);
    blk.attn.proj.init_xavier(rng);
    blk.mlp.fc1.init_xavier(rng);
    blk.mlp.fc2.init_xavier(rng);
  }
  head.init_xavier(rng);
}

Mat GmaeModel::encode(const Mat& all_tokens, const MaskSpec& mask,
                      Workspace& ws) const {
  if (all_tokens.rows() != cfg_.tokens() ||
      all_tokens.cols() != cfg_.grid().dim()) {
    throw Error("encode: token matrix does not match the patch grid");
  }
  if (mask.total != cfg_.tokens()) {
    throw Error("encode: mask total does not match token count");
  }
  if (mask.visible.empty()) {
    throw Error("encode: mask leaves no visible tokens");
  }
  ws.mask = mask;
  const int n = static_cast<int>(mask.visible.size());
  Mat vis(n, all_tokens.cols());
  for (int i = 0; i < n; ++i) vis.row(i) = all_tokens.row(mask.visible[i]);
  Mat x = patch_embed.forward(vis, &ws.patch_c);
  for (int i = 0; i < n; ++i) x.row(i) += enc_pos.row(mask.visible[i]);
  ws.enc_c.resize(enc_blocks.size());
  for (size_t b = 0; b < enc_blocks.size(); ++b) {
    x = enc_blocks[b].forward(x, &ws.enc_c[b]);
  }
  ws.latents = enc_norm.forward(x, &ws.enc_norm_c);
  return ws.latents;
}

Mat GmaeModel::decode(const Mat& latents, const MaskSpec& mask,
                      Workspace& ws) const {
  const int n = static_cast<int>(mask.visible.size());
  if (latents.rows() != n || latents.cols() != cfg_.enc_dim) {
    throw Error("decode: latent matrix does not match the visible set");
  }
  Mat lat = embed.forward(latents, &ws.embed_c);
  for (int i = 0; i < n; ++i) lat.row(i) += dec_pos.row(mask.visible[i]);
  Mat x(n + cfg_.queries, cfg_.dec_dim);
  x.topRows(n) = lat;
  x.bottomRows(cfg_.queries) = queries;
  ws.dec_c.resize(dec_blocks.size());
  for (size_t b = 0; b < dec_blocks.size(); ++b) {
    x = dec_blocks[b].forward(x, &ws.dec_c[b]);
  }
  x = dec_norm.forward(x, &ws.dec_norm_c);
  return head.forward(x.bottomRows(cfg_.queries), &ws.head_c);
}

Mat GmaeModel::forward(const Image& img, const MaskSpec& mask,
                       Workspace& ws) const {
  Mat tokens = patchify(img, cfg_.grid());
  return decode(encode(tokens, mask, ws), mask, ws);
}

void GmaeModel::backward(const Mat& d_raw, const Workspace& ws,
                         ModelGrads& g) const {
  const int n = static_cast<int>(ws.mask.visible.size());
  const int total = n + cfg_.queries;
  if (d_raw.rows() != cfg_.queries || d_raw.cols() != kGaussianDim) {
    throw Error("backward: gradient shape does not match the model output");
  }
  // Head touches only the query rows of the normalized decoder output.
  Mat d_norm_out = Mat::Zero(total, cfg_.dec_dim);
  d_norm_out.bottomRows(cfg_.queries) =
      head.backward(d_raw, ws.head_c, g.head);
  Mat dx = dec_norm.backward(d_norm_out, ws.dec_norm_c, g.dec_norm);
  for (size_t b = dec_blocks.size(); b-- > 0;) {
    dx = dec_blocks[b].backward(dx, ws.dec_c[b], g.dec_blocks[b]);
  }
  g.queries += dx.bottomRows(cfg_.queries);
  // Positions are fixed, so the additive embedding passes gradients through.
  Mat d_latents = embed.backward(dx.topRows(n), ws.embed_c, g.embed);
  Mat de = enc_norm.backward(d_latents, ws.enc_norm_c, g.enc_norm);
  for (size_t b = enc_blocks.size(); b-- > 0;) {
    de = enc_blocks[b].backward(de, ws.enc_c[b], g.enc_blocks[b]);
  }
  patch_embed.backward(de, ws.patch_c, g.patch_embed);
}

std::vector<ParamRef> GmaeModel::collect_params() {
  std::vector<ParamRef> out;
  patch_embed.collect("encoder.patch_embed", out);
  for (size_t b = 0; b < enc_blocks.size(); ++b) {
    enc_blocks[b].collect("encoder.block" + std::to_string(b), out);
  }
  enc_norm.collect("encoder.norm", out);
  embed.collect("decoder.embed", out);
  out.push_back({"decoder.queries", &queries});
  for (size_t b = 0; b < dec_blocks.size(); ++b) {
    dec_blocks[b].collect("decoder.block" + std::to_string(b), out);
  }
  dec_norm.collect("decoder.norm", out);
  head.collect("decoder.head", out);
  return out;
}

std::vector<ParamRef> GmaeModel::collect_params() const {
  return const_cast<GmaeModel*>(this)->collect_params();
}

ModelGrads::ModelGrads(const GmaeModel& model) {
  patch_embed.resize(model.patch_embed);
  enc_blocks.resize(model.enc_blocks.size());
  for (size_t b = 0; b < enc_blocks.size(); ++b) {
    enc_blocks[b].resize(model.enc_blocks[b]);
  }
  enc_norm.resize(model.enc_norm);
  embed.resize(model.embed);
  queries = Mat::Zero(model.queries.rows(), model.queries.cols());
  dec_blocks.resize(model.dec_blocks.size());
  for (size_t b = 0; b < dec_blocks.size(); ++b) {
    dec_blocks[b].resize(model.dec_blocks[b]);
  }
  dec_norm.resize(model.dec_norm);
  head.resize(model.head);
}

std::vector<Mat*> ModelGrads::collect() {
  std::vector<Mat*> out;
  nn::Linear::collect_grads(patch_embed, out);
  for (auto& b : enc_blocks) nn::Block::collect_grads(b, out);
  nn::LayerNorm::collect_grads(enc_norm, out);
  nn::Linear::collect_grads(embed, out);
  out.push_back(&queries);
  for (auto& b : dec_blocks) nn::Block::collect_grads(b, out);
  nn::LayerNorm::collect_grads(dec_norm, out);
  nn::Linear::collect_grads(head, out);
  return out;
}

void ModelGrads::zero() {
  for (Mat* m : collect()) m->setZero();
}

void ModelGrads::add(const ModelGrads& other) {
  auto mine = collect();
  auto theirs = const_cast<ModelGrads&>(other).collect();
  for (size_t i = 0; i < mine.size(); ++i) *mine[i] += *theirs[i];
}

void ModelGrads::scale(double factor) {
  for (Mat* m : collect()) *m *= factor;
}

}  // namespace gmae
