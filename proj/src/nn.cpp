// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/nn.hpp"

#include <cmath>

namespace gmae::nn {

// ------------------------------------------------------------------ Linear

void Linear::init_xavier(Rng& rng) {
  const double limit = std::sqrt(6.0 / (W.rows() + W.cols()));
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      W(i, j) = rng.uniform(-limit, limit);
    }
  }
  b.setZero();
}

Mat Linear::forward(const Mat& x, Cache* cache) const {
  if (cache) cache->x = x;
  Mat y = x * W;
  y.rowwise() += b.row(0);
  return y;
}

Mat Linear::backward(const Mat& dy, const Cache& cache, Grads& g) const {
  g.W.noalias() += cache.x.transpose() * dy;
  g.b.row(0) += dy.colwise().sum();
  return dy * W.transpose();
}

void Linear::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".weight", &W});
  out.push_back({prefix + ".bias", &b});
}

void Linear::collect_grads(Grads& g, std::vector<Mat*>& out) {
  out.push_back(&g.W);
  out.push_back(&g.b);
}

// --------------------------------------------------------------- LayerNorm

Mat LayerNorm::forward(const Mat& x, Cache* cache) const {
  const Eigen::Index n = x.rows(), d = x.cols();
  Mat xhat(n, d);
  Vec inv_std(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().mean();
    const double is = 1.0 / std::sqrt(var + kEps);
    xhat.row(i) = (x.row(i).array() - mean) * is;
    inv_std(i) = is;
  }
  Mat y = (xhat.array().rowwise() * gamma.row(0).array()).matrix();
  y.rowwise() += beta.row(0);
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Mat LayerNorm::backward(const Mat& dy, const Cache& cache, Grads& g) const {
  const Eigen::Index n = dy.rows(), d = dy.cols();
  g.gamma.row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  g.beta.row(0) += dy.colwise().sum();
  Mat dxhat = (dy.array().rowwise() * gamma.row(0).array()).matrix();
  Mat dx(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sum_dxhat = dxhat.row(i).sum();
    const double sum_dot = dxhat.row(i).dot(cache.xhat.row(i));
    dx.row(i) = ((cache.inv_std(i) / d) *
                 (static_cast<double>(d) * dxhat.row(i).array() - sum_dxhat -
                  cache.xhat.row(i).array() * sum_dot))
                    .matrix();
  }
  return dx;
}

void LayerNorm::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".gamma", &gamma});
  out.push_back({prefix + ".beta", &beta});
}

void LayerNorm::collect_grads(Grads& g, std::vector<Mat*>& out) {
  out.push_back(&g.gamma);
  out.push_back(&g.beta);
}

// -------------------------------------------------------------------- GELU

Mat gelu(const Mat& x) {
  constexpr double inv_sqrt2 = 0.7071067811865475244;
  return x.unaryExpr(
      [](double v) { return 0.5 * v * (1.0 + std::erf(v * inv_sqrt2)); });
}

Mat gelu_backward(const Mat& dy, const Mat& x) {
  constexpr double inv_sqrt2 = 0.7071067811865475244;
  constexpr double inv_sqrt2pi = 0.3989422804014326779;
  Mat d = x.unaryExpr([](double v) {
    return 0.5 * (1.0 + std::erf(v * inv_sqrt2)) +
           v * inv_sqrt2pi * std::exp(-0.5 * v * v);
  });
  return dy.cwiseProduct(d);
}

// --------------------------------------------------------- SelfAttention

Mat SelfAttention::forward(const Mat& x, Cache* cache) const {
  const Eigen::Index s = x.rows();
  const Eigen::Index d = x.cols();
  const Eigen::Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Cache local;
  Cache& c = cache ? *cache : local;
  c.qkv_out = qkv.forward(x, cache ? &c.qkv_c : nullptr);
  c.attn.assign(heads, Mat());
  Mat concat(s, d);
  for (int h = 0; h < heads; ++h) {
    auto Qh = c.qkv_out.middleCols(h * dh, dh);
    auto Kh = c.qkv_out.middleCols(d + h * dh, dh);
    auto Vh = c.qkv_out.middleCols(2 * d + h * dh, dh);
    Mat score = (Qh * Kh.transpose()) * scale;
    // Row-wise softmax with max subtraction.
    for (Eigen::Index i = 0; i < s; ++i) {
      const double m = score.row(i).maxCoeff();
      score.row(i) = (score.row(i).array() - m).exp();
      score.row(i) /= score.row(i).sum();
    }
    concat.middleCols(h * dh, dh).noalias() = score * Vh;
    c.attn[h] = std::move(score);
  }
  return proj.forward(concat, cache ? &c.proj_c : nullptr);
}

Mat SelfAttention::backward(const Mat& dy, const Cache& cache,
                            Grads& g) const {
  const Eigen::Index d = qkv.W.rows();
  const Eigen::Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Mat dconcat = proj.backward(dy, cache.proj_c, g.proj);
  const Eigen::Index s = dconcat.rows();
  Mat dqkv = Mat::Zero(s, 3 * d);
  for (int h = 0; h < heads; ++h) {
    const Mat& A = cache.attn[h];
    auto Qh = cache.qkv_out.middleCols(h * dh, dh);
    auto Kh = cache.qkv_out.middleCols(d + h * dh, dh);
    auto Vh = cache.qkv_out.middleCols(2 * d + h * dh, dh);
    auto dOh = dconcat.middleCols(h * dh, dh);
    Mat dA = dOh * Vh.transpose();
    dqkv.middleCols(2 * d + h * dh, dh).noalias() = A.transpose() * dOh;
    // Softmax backward per row: dS = A * (dA - sum(dA * A)).
    Vec rowdot = (dA.array() * A.array()).rowwise().sum().matrix();
    dA.colwise() -= rowdot;
    Mat dS = A.cwiseProduct(dA);
    dqkv.middleCols(h * dh, dh).noalias() = dS * Kh * scale;
    dqkv.middleCols(d + h * dh, dh).noalias() = dS.transpose() * Qh * scale;
  }
  return qkv.backward(dqkv, cache.qkv_c, g.qkv);
}

void SelfAttention::collect(const std::string& prefix,
                            std::vector<ParamRef>& out) {
  qkv.collect(prefix + ".qkv", out);
  proj.collect(prefix + ".proj", out);
}

void SelfAttention::collect_grads(Grads& g, std::vector<Mat*>& out) {
  Linear::collect_grads(g.qkv, out);
  Linear::collect_grads(g.proj, out);
}

// --------------------------------------------------------------------- MLP

Mat Mlp::forward(const Mat& x, Cache* cache) const {
  Mat pre = fc1.forward(x, cache ? &cache->fc1_c : nullptr);
  Mat act = gelu(pre);
  Mat out = fc2.forward(act, cache ? &cache->fc2_c : nullptr);
  if (cache) cache->pre = std::move(pre);
  return out;
}

Mat Mlp::backward(const Mat& dy, const Cache& cache, Grads& g) const {
  Mat dact = fc2.backward(dy, cache.fc2_c, g.fc2);
  Mat dpre = gelu_backward(dact, cache.pre);
  return fc1.backward(dpre, cache.fc1_c, g.fc1);
}

void Mlp::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  fc1.collect(prefix + ".fc1", out);
  fc2.collect(prefix + ".fc2", out);
}

void Mlp::collect_grads(Grads& g, std::vector<Mat*>& out) {
  Linear::collect_grads(g.fc1, out);
  Linear::collect_grads(g.fc2, out);
}

// ------------------------------------------------------------------- Block

Mat Block::forward(const Mat& x, Cache* cache) const {
  Mat x1 =
      x + attn.forward(ln1.forward(x, cache ? &cache->ln1_c : nullptr),
                       cache ? &cache->attn_c : nullptr);
  Mat out =
      x1 + mlp.forward(ln2.forward(x1, cache ? &cache->ln2_c : nullptr),
                       cache ? &cache->mlp_c : nullptr);
  return out;
}

Mat Block::backward(const Mat& dy, const Cache& cache, Grads& g) const {
  Mat dx1 = dy + ln2.backward(mlp.backward(dy, cache.mlp_c, g.mlp),
                              cache.ln2_c, g.ln2);
  return dx1 + ln1.backward(attn.backward(dx1, cache.attn_c, g.attn),
                            cache.ln1_c, g.ln1);
}

void Block::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  ln1.collect(prefix + ".ln1", out);
  attn.collect(prefix + ".attn", out);
  ln2.collect(prefix + ".ln2", out);
  mlp.collect(prefix + ".mlp", out);
}

void Block::collect_grads(Grads& g, std::vector<Mat*>& out) {
  LayerNorm::collect_grads(g.ln1, out);
  SelfAttention::collect_grads(g.attn, out);
  LayerNorm::collect_grads(g.ln2, out);
  Mlp::collect_grads(g.mlp, out);
}

}  // namespace gmae::nn
