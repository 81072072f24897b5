// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>

#include "gmae/renderer.hpp"
#include "gmae/rng.hpp"
#include "gmae/types.hpp"

namespace gmae::test {

// Shared pass rule for analytic-vs-central-difference comparisons.
inline bool fd_close(double analytic, double fd, double rtol = 1e-4,
                     double atol = 1e-7) {
  return std::abs(analytic - fd) <=
         rtol * std::max(std::abs(analytic), std::abs(fd)) + atol;
}

struct FdReport {
  double max_abs_diff = 0.0;
  double max_rel = 0.0;
  int failures = 0;
};

// Central differences over every entry of `point` against `analytic`.
inline FdReport compare_fd(const Mat& analytic,
                           const std::function<double(const Mat&)>& loss,
                           const Mat& point, double h = 1e-4,
                           double rtol = 1e-4, double atol = 1e-7) {
  FdReport rep;
  for (int i = 0; i < point.rows(); ++i) {
    for (int j = 0; j < point.cols(); ++j) {
      Mat p = point;
      p(i, j) = point(i, j) + h;
      const double lp = loss(p);
      p(i, j) = point(i, j) - h;
      const double lm = loss(p);
      const double fd = (lp - lm) / (2.0 * h);
      const double a = analytic(i, j);
      const double diff = std::abs(a - fd);
      const double scale = std::max(std::abs(a), std::abs(fd));
      rep.max_abs_diff = std::max(rep.max_abs_diff, diff);
      if (scale > 0.0) rep.max_rel = std::max(rep.max_rel, diff / scale);
      if (!fd_close(a, fd, rtol, atol)) ++rep.failures;
    }
  }
  return rep;
}

// Random raw parameter block whose activated scene stays smooth for finite
// differences: spread depths, opacities below the clamp, moderate scales.
inline Mat smooth_scene(uint64_t seed, int k) {
  Rng rng = Rng::stream(seed, 0x7363656e);
  Mat raw(k, kGaussianDim);
  for (int i = 0; i < k; ++i) {
    raw(i, 0) = rng.uniform(-0.7, 0.7);
    raw(i, 1) = rng.uniform(-0.7, 0.7);
    raw(i, 2) = k == 1 ? 0.0 : -0.6 + 1.2 * i / (k - 1);
    for (int j = 3; j < 6; ++j) raw(i, j) = rng.uniform(-1.73, -0.8);
    for (int j = 6; j < 10; ++j) raw(i, j) = rng.uniform(-1.0, 1.0);
    for (int j = 10; j < 13; ++j) raw(i, j) = rng.uniform(-1.0, 1.0);
    raw(i, 13) = rng.uniform(-1.0, 0.5);
  }
  return raw;
}

// Camera whose wide support cutoff pushes the truncation discontinuity to
// ~exp(-32), far below finite-difference resolution.
inline CameraConfig smooth_camera(int size) {
  CameraConfig cam;
  cam.height = cam.width = size;
  cam.cutoff = 8.0;
  return cam;
}

// Unconstrained random scene for forward-path tests (production cutoff).
inline Mat random_scene(uint64_t seed, int k) {
  Rng rng = Rng::stream(seed, 0x72617731);
  Mat raw(k, kGaussianDim);
  for (int i = 0; i < raw.size(); ++i) {
    raw.data()[i] = rng.uniform(-2.0, 2.0);
  }
  return raw;
}

inline Image random_image(uint64_t seed, int h, int w) {
  Rng rng = Rng::stream(seed, 0x696d6167);
  Image img(h, w);
  for (double& v : img.data) v = rng.uniform();
  return img;
}

}  // namespace gmae::test
