// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/optimizer.hpp"

#include <cmath>

namespace gmae {

void AdamWConfig::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw Error("AdamWConfig: betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw Error("AdamWConfig: eps must be positive");
  if (!(weight_decay >= 0.0)) {
    throw Error("AdamWConfig: weight decay must be non-negative");
  }
}

AdamW::AdamW(std::vector<ParamRef> params, const AdamWConfig& cfg)
    : params_(std::move(params)), cfg_(cfg) {
  cfg_.validate();
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.push_back(Mat::Zero(p.value->rows(), p.value->cols()));
    v_.push_back(Mat::Zero(p.value->rows(), p.value->cols()));
  }
}

void AdamW::step(const std::vector<Mat*>& grads, double lr) {
  if (grads.size() != params_.size()) {
    throw Error("AdamW: gradient list does not match parameter list");
  }
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw Error("AdamW: invalid learning rate");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    Mat& theta = *params_[i].value;
    const Mat& g = *grads[i];
    if (g.rows() != theta.rows() || g.cols() != theta.cols()) {
      throw Error("AdamW: gradient shape mismatch for " + params_[i].name);
    }
    Mat& m = m_[i];
    Mat& v = v_[i];
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    const Mat mhat = m / bc1;
    const Mat vhat = v / bc2;
    theta.array() -= lr * mhat.array() / (vhat.array().sqrt() + cfg_.eps);
    theta -= (lr * cfg_.weight_decay) * theta;
  }
}

}  // namespace gmae
