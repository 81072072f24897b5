// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "gmae/nn.hpp"
#include "gmae/types.hpp"

namespace gmae {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  double weight_decay = 0.05;

  void validate() const;
};

// Decoupled-weight-decay Adam:
//   theta <- theta - lr * mhat / (sqrt(vhat) + eps) - lr * wd * theta
// Decay applies uniformly to every parameter, so a step with zero gradients
// contracts all weights by exactly (1 - lr * wd).
class AdamW {
 public:
  AdamW(std::vector<ParamRef> params, const AdamWConfig& cfg);

  // grads must align with the parameter list; lr is supplied per step.
  void step(const std::vector<Mat*>& grads, double lr);

  long t() const { return t_; }
  void set_t(long t) { t_ = t; }
  const AdamWConfig& config() const { return cfg_; }
  const std::vector<ParamRef>& params() const { return params_; }
  std::vector<Mat>& moment1() { return m_; }
  std::vector<Mat>& moment2() { return v_; }

 private:
  std::vector<ParamRef> params_;
  AdamWConfig cfg_;
  std::vector<Mat> m_, v_;
  long t_ = 0;
};

}  // namespace gmae
