// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "gmae/loss.hpp"
#include "gmae/renderer.hpp"
#include "helpers.hpp"

using namespace gmae;

namespace {

// Loss = sum of fixed random weights times rendered pixels; its gradient
// image is just the weights.
Image pixel_weights(uint64_t seed, int h, int w) {
  Rng rng = Rng::stream(seed, 0x77656967);
  Image weights(h, w);
  for (double& v : weights.data) v = rng.uniform(-1.0, 1.0);
  return weights;
}

double weighted_sum(const Image& img, const Image& weights) {
  double acc = 0.0;
  for (size_t i = 0; i < img.data.size(); ++i) {
    acc += img.data[i] * weights.data[i];
  }
  return acc;
}

Mat analytic_grad(const Mat& raw, const CameraConfig& cam,
                  const Image& weights) {
  RenderResult rr = render_gaussians(raw, ScaleClamp{1.0}, cam);
  return render_backward(raw, rr.gaussians, rr.screen, cam, ScaleClamp{1.0},
                         weights);
}

}  // namespace

TEST_CASE("single gaussian gradients match finite differences") {
  CameraConfig cam = test::smooth_camera(16);
  cam.background = {0.2, 0.1, 0.4};
  Mat raw = test::smooth_scene(21, 1);
  Image weights = pixel_weights(4, 16, 16);
  auto loss = [&](const Mat& p) {
    return weighted_sum(render_gaussians(p, ScaleClamp{1.0}, cam).out.image,
                        weights);
  };
  test::FdReport rep = test::compare_fd(analytic_grad(raw, cam, weights), loss, raw);
  CHECK(rep.failures == 0);
  CHECK(rep.max_abs_diff < 1e-5);
}

TEST_CASE("overlapping scene gradients match finite differences") {
  CameraConfig cam = test::smooth_camera(32);
  cam.background = {0.5, 0.5, 0.5};
  Mat raw = test::smooth_scene(33, 6);
  Image weights = pixel_weights(8, 32, 32);
  auto loss = [&](const Mat& p) {
    return weighted_sum(render_gaussians(p, ScaleClamp{1.0}, cam).out.image,
                        weights);
  };
  Mat grad = analytic_grad(raw, cam, weights);
  test::FdReport rep = test::compare_fd(grad, loss, raw);
  CHECK(rep.failures == 0);

  SUBCASE("the depth channel carries no gradient") {
    for (int i = 0; i < raw.rows(); ++i) CHECK(grad(i, 2) == 0.0);
  }
  SUBCASE("every other channel receives gradient somewhere") {
    for (int j : {0, 1, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13}) {
      CHECK(grad.col(j).cwiseAbs().maxCoeff() > 0.0);
    }
  }
}

TEST_CASE("a non-default scale clamp keeps gradients exact") {
  CameraConfig cam = test::smooth_camera(16);
  Mat raw = test::smooth_scene(55, 3);
  Image weights = pixel_weights(9, 16, 16);
  const ScaleClamp clamp{1.7};
  auto loss = [&](const Mat& p) {
    return weighted_sum(render_gaussians(p, clamp, cam).out.image, weights);
  };
  RenderResult rr = render_gaussians(raw, clamp, cam);
  Mat grad =
      render_backward(raw, rr.gaussians, rr.screen, cam, clamp, weights);
  test::FdReport rep = test::compare_fd(grad, loss, raw);
  CHECK(rep.failures == 0);
}

TEST_CASE("the alpha clamp is treated as locally constant") {
  CameraConfig cam = test::smooth_camera(16);
  // One gaussian dead on a pixel center with opacity pushed into the clamp:
  // p = 2 * 8.5 / 16 - 1 = 1/16 places the mean on pixel (8, 8).
  Mat raw = Mat::Zero(1, kGaussianDim);
  raw(0, 0) = std::atanh(1.0 / 16.0);
  raw(0, 1) = std::atanh(1.0 / 16.0);
  raw(0, 3) = raw(0, 4) = raw(0, 5) = -0.2;
  raw(0, 13) = 12.0;  // opacity ~0.999994, alpha clamps at the center

  // Weight only the clamped pixel.
  Image weights(16, 16, 0.0);
  weights.at(8, 8, 0) = 1.0;
  weights.at(8, 8, 1) = -0.5;
  weights.at(8, 8, 2) = 0.25;

  Mat grad = analytic_grad(raw, cam, weights);
  // Alpha is pinned at 0.999 there, so opacity and geometry see zero
  // gradient through this pixel while color still flows.
  CHECK(grad(0, 13) == 0.0);
  CHECK(grad(0, 0) == 0.0);
  CHECK(grad(0, 3) == 0.0);
  CHECK(grad.row(0).segment(10, 3).cwiseAbs().minCoeff() > 0.0);

  auto loss = [&](const Mat& p) {
    return weighted_sum(render_gaussians(p, ScaleClamp{1.0}, cam).out.image,
                        weights);
  };
  test::FdReport rep = test::compare_fd(grad, loss, raw);
  CHECK(rep.failures == 0);
}

TEST_CASE("masked loss gradients chain through the renderer") {
  CameraConfig cam = test::smooth_camera(16);
  cam.background = {0.3, 0.3, 0.3};
  const PatchGrid grid{16, 16, 8};
  MaskSpec mask = MaskSpec::from_visible(grid.count(), {0, 3});
  Image target = test::random_image(14, 16, 16);
  Mat raw = test::smooth_scene(77, 4);

  RenderResult rr = render_gaussians(raw, ScaleClamp{1.0}, cam);
  Image gimg =
      masked_mse_grad(rr.out.image, target, mask, grid, LossMode::kMasked);
  Mat grad = render_backward(raw, rr.gaussians, rr.screen, cam,
                             ScaleClamp{1.0}, gimg);
  auto loss = [&](const Mat& p) {
    return masked_mse(render_gaussians(p, ScaleClamp{1.0}, cam).out.image,
                      target, mask, grid, LossMode::kMasked);
  };
  test::FdReport rep = test::compare_fd(grad, loss, raw);
  CHECK(rep.failures == 0);
}

TEST_CASE("render_backward rejects malformed inputs") {
  CameraConfig cam = test::smooth_camera(16);
  Mat raw = test::smooth_scene(3, 2);
  RenderResult rr = render_gaussians(raw, ScaleClamp{1.0}, cam);

  Image bad(16, 16, 0.0);
  bad.at(3, 5, 1) = std::nan("");
  CHECK_THROWS_WITH_AS(
      render_backward(raw, rr.gaussians, rr.screen, cam, ScaleClamp{1.0}, bad),
      doctest::Contains("non-finite"), Error);

  Image wrong(8, 8, 0.0);
  CHECK_THROWS_AS(render_backward(raw, rr.gaussians, rr.screen, cam,
                                  ScaleClamp{1.0}, wrong),
                  Error);

  Mat short_raw = raw.topRows(1);
  CHECK_THROWS_AS(render_backward(short_raw, rr.gaussians, rr.screen, cam,
                                  ScaleClamp{1.0}, Image(16, 16, 0.0)),
                  Error);
}

TEST_CASE("gradients of skipped gaussians are zero") {
  CameraConfig cam = test::smooth_camera(16);
  cam.lowpass = 0.0;
  Mat raw = test::smooth_scene(91, 3);
  // Push one row to a virtually singular footprint: near-identity rotation
  // keeps the collapsed x axis in the screen plane.
  raw(1, 3) = -80.0;  // scale_x ~ 1e-35
  raw(1, 6) = 40.0;
  raw(1, 7) = raw(1, 8) = raw(1, 9) = -40.0;
  RenderResult rr = render_gaussians(raw, ScaleClamp{1.0}, cam);
  REQUIRE(rr.screen.degenerate_count == 1);
  REQUIRE(rr.screen.skipped[1] == 1);
  Image weights = pixel_weights(2, 16, 16);
  Mat grad = render_backward(raw, rr.gaussians, rr.screen, cam,
                             ScaleClamp{1.0}, weights);
  CHECK(grad.row(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(grad.row(0).cwiseAbs().maxCoeff() > 0.0);
}
