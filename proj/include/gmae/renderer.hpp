// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "gmae/gaussians.hpp"
#include "gmae/types.hpp"

namespace gmae {

// Orthographic camera over the [-1, 1]^2 image plane.
//
// Conventions:
//   * screen mean  = (p_x + 1, p_y + 1) * (W/2, H/2); p_y = -1 is image row 0
//   * pixel (ix, iy) samples the continuous point (ix + 0.5, iy + 0.5)
//   * screen covariance = D * Sigma[0:2, 0:2] * D + lowpass * I, with
//     D = diag(W/2, H/2); the low-pass floor keeps footprints >= ~1 px
//   * depth = z_near + (p_z + 1) / 2 * (z_far - z_near); depth is used only
//     to order compositing, so p_z carries no gradient
struct CameraConfig {
  int height = 64;
  int width = 64;
  double z_near = 0.1;
  double z_far = 2.1;
  Eigen::Vector3d background{0.0, 0.0, 0.0};
  double lowpass = 0.3;  // screen-space variance floor, px^2
  double cutoff = 3.0;   // Gaussian support radius, in standard deviations

  void validate() const;
  double depth_of(double p_z) const {
    return z_near + 0.5 * (p_z + 1.0) * (z_far - z_near);
  }
};

// Alpha values are clamped to this bound before compositing.
inline constexpr double kAlphaMax = 0.999;

// Screen-space view of a GaussianSet.
struct ScreenGaussianSet {
  Eigen::MatrixX2d means;            // K x 2, pixel coordinates
  std::vector<Eigen::Matrix2d> cov;  // 2 x 2 screen covariances
  std::vector<Eigen::Matrix2d> inv_cov;
  Vec depths;
  std::vector<int> order;       // indices by ascending depth, ties by index
  std::vector<uint8_t> skipped; // numerically degenerate, never composited
  int degenerate_count = 0;

  int count() const { return static_cast<int>(means.rows()); }
};

ScreenGaussianSet project(const GaussianSet& g, const CameraConfig& cam);

struct RenderOutput {
  Image image;
  Plane transmittance;             // final T per pixel
  std::vector<long> touch_counts;  // pixels composited, per Gaussian
};

// Reference renderer: every pixel walks every Gaussian in depth order.
// prefix >= 0 composites only the first `prefix` Gaussians in depth order
// (used for cumulative layer renders); prefix < 0 means all.
RenderOutput render_naive(const ScreenGaussianSet& sg,
                          const Eigen::MatrixX3d& colors, const Vec& opacities,
                          const CameraConfig& cam, int prefix = -1);

// Production renderer: 16 x 16 pixel tiles with conservative per-Gaussian
// bounding boxes.  Bitwise identical to render_naive by construction: the
// bounding box provably contains every pixel with q <= cutoff^2, so each
// pixel sees the same Gaussians in the same order with the same arithmetic.
RenderOutput render_tiled(const ScreenGaussianSet& sg,
                          const Eigen::MatrixX3d& colors, const Vec& opacities,
                          const CameraConfig& cam, int prefix = -1);

// Gradient of a scalar loss with respect to the raw K x 14 parameters, given
// d loss / d image.  Recomputes per-pixel forward state tile by tile, then
// chains screen-space gradients through projection, covariance assembly and
// the activations.  grad_image must be finite everywhere.
Mat render_backward(const Mat& raw, const GaussianSet& g,
                    const ScreenGaussianSet& sg, const CameraConfig& cam,
                    const ScaleClamp& clamp, const Image& grad_image);

// Convenience bundle: activate -> project -> render_tiled.
struct RenderResult {
  GaussianSet gaussians;
  ScreenGaussianSet screen;
  RenderOutput out;
};
RenderResult render_gaussians(const Mat& raw, const ScaleClamp& clamp,
                              const CameraConfig& cam, int prefix = -1);

}  // namespace gmae
