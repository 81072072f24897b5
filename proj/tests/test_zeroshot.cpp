// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <set>

#include "doctest.h"
#include "gmae/zeroshot.hpp"
#include "helpers.hpp"

using namespace gmae;

namespace {

// Raw rows with explicit tanh-space depths; everything else is mild.
Mat scene_with_depths(const std::vector<double>& depth_fracs, uint64_t seed) {
  Rng rng = Rng::stream(seed, 0x6c617972);
  Mat raw(static_cast<Eigen::Index>(depth_fracs.size()), kGaussianDim);
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    raw(i, 0) = rng.uniform(-0.6, 0.6);
    raw(i, 1) = rng.uniform(-0.6, 0.6);
    // depth = z_near + frac * (z_far - z_near) after activation
    raw(i, 2) = std::atanh(2.0 * depth_fracs[i] - 1.0);
    for (int j = 3; j < 6; ++j) raw(i, j) = rng.uniform(-1.6, -0.9);
    for (int j = 6; j < 13; ++j) raw(i, j) = rng.uniform(-1.0, 1.0);
    raw(i, 13) = rng.uniform(0.0, 1.5);
  }
  return raw;
}

bool images_identical(const Image& a, const Image& b) {
  return a.height == b.height && a.width == b.width && a.data == b.data;
}

CameraConfig small_camera() {
  CameraConfig cam;
  cam.height = cam.width = 32;
  return cam;
}

}  // namespace

TEST_CASE("equal-count grouping splits the depth order into even prefixes") {
  CameraConfig cam = small_camera();
  ScaleClamp clamp;
  Mat raw = scene_with_depths(
      {0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95}, 1);

  LayerStack s3 = assign_layers(raw, clamp, cam, 3, GroupMode::kEqualCount,
                                0.01);
  CHECK(s3.boundaries == std::vector<int>{4, 8, 10});

  LayerStack s10 = assign_layers(raw, clamp, cam, 10, GroupMode::kEqualCount,
                                 0.01);
  CHECK(s10.boundaries == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10});

  LayerStack s4 = assign_layers(raw, clamp, cam, 4, GroupMode::kEqualCount,
                                0.01);
  CHECK(s4.boundaries == std::vector<int>{3, 6, 9, 10});

  CHECK_THROWS_AS(assign_layers(raw, clamp, cam, 11, GroupMode::kEqualCount,
                                0.01),
                  Error);
  CHECK_THROWS_AS(assign_layers(raw, clamp, cam, 0, GroupMode::kEqualCount,
                                0.01),
                  Error);
  CHECK_THROWS_AS(assign_layers(raw, clamp, cam, 3, GroupMode::kEqualCount,
                                -0.5),
                  Error);
  CHECK_THROWS_AS(assign_layers(Mat(0, kGaussianDim), clamp, cam, 1,
                                GroupMode::kEqualCount, 0.01),
                  Error);
}

TEST_CASE("equal-depth-width grouping bins by absolute depth") {
  CameraConfig cam = small_camera();
  ScaleClamp clamp;
  // Depth fractions chosen so 3 uniform bins hold 2, 1, and 3 Gaussians.
  // Shuffled input order must not matter: binning happens after the depth
  // sort.
  Mat raw = scene_with_depths({0.75, 0.10, 0.50, 0.20, 0.97, 0.80}, 2);

  LayerStack s = assign_layers(raw, clamp, cam, 3,
                               GroupMode::kEqualDepthWidth, 0.01);
  CHECK(s.boundaries == std::vector<int>{2, 3, 6});

  // Bins with no Gaussians repeat the previous boundary.
  LayerStack gap = assign_layers(scene_with_depths({0.05, 0.1, 0.9, 0.95}, 3),
                                 clamp, cam, 4, GroupMode::kEqualDepthWidth,
                                 0.01);
  CHECK(gap.boundaries == std::vector<int>{2, 2, 2, 4});

  // Unlike equal-count, more layers than Gaussians is fine here.
  LayerStack wide = assign_layers(scene_with_depths({0.5}, 4), clamp, cam, 8,
                                  GroupMode::kEqualDepthWidth, 0.01);
  CHECK(wide.boundaries.back() == 1);
}

TEST_CASE("cumulative renders bracket the full render exactly") {
  CameraConfig cam = small_camera();
  ScaleClamp clamp;
  Mat raw = scene_with_depths({0.1, 0.3, 0.4, 0.55, 0.7, 0.9}, 5);
  LayerStack s = assign_layers(raw, clamp, cam, 3, GroupMode::kEqualCount,
                               0.02);

  REQUIRE(s.cumulative.size() == 4);
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        CHECK(s.cumulative[0].at(y, x, c) == cam.background[c]);
      }
    }
  }
  Image full = render_gaussians(raw, clamp, cam).out.image;
  CHECK(images_identical(s.cumulative.back(), full));
  for (int n = 0; n < 3; ++n) {
    Image prefix = cumulative_render(raw, clamp, cam, s.boundaries[n]);
    CHECK(images_identical(s.cumulative[n + 1], prefix));
  }

  CHECK_THROWS_AS(cumulative_render(raw, clamp, cam, -1), Error);
  CHECK_THROWS_AS(cumulative_render(raw, clamp, cam, 7), Error);
  CHECK(images_identical(cumulative_render(raw, clamp, cam, 6), full));
}

TEST_CASE("layer assignment matches a pixelwise recomputation") {
  CameraConfig cam = small_camera();
  ScaleClamp clamp;
  Mat raw = scene_with_depths({0.08, 0.2, 0.35, 0.5, 0.62, 0.78, 0.9}, 6);
  const double threshold = 0.02;
  LayerStack s = assign_layers(raw, clamp, cam, 4, GroupMode::kEqualCount,
                               threshold);

  int assigned = 0, unassigned = 0;
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      int expect = -1;
      for (int n = 0; n < s.layer_count && expect < 0; ++n) {
        for (int c = 0; c < 3; ++c) {
          if (std::abs(s.cumulative[n + 1].at(y, x, c) -
                       s.cumulative[n].at(y, x, c)) > threshold) {
            expect = n;
            break;
          }
        }
      }
      CHECK(s.layer_index(y, x) == expect);
      (expect >= 0 ? assigned : unassigned)++;
    }
  }
  // The scene covers part of the frame, not all of it.
  CHECK(assigned > 0);
  CHECK(unassigned > 0);

  // Re-running the whole pipeline reproduces the stack bit for bit.
  LayerStack again = assign_layers(raw, clamp, cam, 4, GroupMode::kEqualCount,
                                   threshold);
  CHECK((again.layer_index.array() == s.layer_index.array()).all());
  for (size_t i = 0; i < s.cumulative.size(); ++i) {
    CHECK(images_identical(again.cumulative[i], s.cumulative[i]));
  }
}

TEST_CASE("edge detection marks exactly the 4-neighbor label changes") {
  CameraConfig cam = small_camera();
  ScaleClamp clamp;
  Mat raw = scene_with_depths({0.1, 0.25, 0.4, 0.6, 0.8}, 7);
  LayerStack s = assign_layers(raw, clamp, cam, 5, GroupMode::kEqualCount,
                               0.02);
  EdgeMap e = edge_detect(s);
  REQUIRE(e.height == cam.height);
  REQUIRE(e.width == cam.width);

  long edge_pixels = 0;
  for (int y = 0; y < e.height; ++y) {
    for (int x = 0; x < e.width; ++x) {
      bool expect = false;
      const int here = s.layer_index(y, x);
      if (y > 0 && s.layer_index(y - 1, x) != here) expect = true;
      if (y + 1 < e.height && s.layer_index(y + 1, x) != here) expect = true;
      if (x > 0 && s.layer_index(y, x - 1) != here) expect = true;
      if (x + 1 < e.width && s.layer_index(y, x + 1) != here) expect = true;
      CHECK(e.at(y, x) == expect);
      edge_pixels += expect;
    }
  }
  CHECK(edge_pixels > 0);

  // A constant labeling has no edges: a huge threshold assigns nothing.
  LayerStack flat = assign_layers(raw, clamp, cam, 5, GroupMode::kEqualCount,
                                  100.0);
  EdgeMap none = edge_detect(flat);
  for (int y = 0; y < none.height; ++y) {
    for (int x = 0; x < none.width; ++x) CHECK(!none.at(y, x));
  }
}

TEST_CASE("figure-ground splits nest monotonically") {
  CameraConfig cam = small_camera();
  ScaleClamp clamp;
  Mat raw = scene_with_depths({0.1, 0.3, 0.5, 0.7, 0.9}, 8);
  LayerStack s = assign_layers(raw, clamp, cam, 5, GroupMode::kEqualCount,
                               0.02);

  SegmentationMask all = figure_ground(s, 0);
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      CHECK(all.at(y, x) == (s.layer_index(y, x) >= 0));
    }
  }

  SegmentationMask empty = figure_ground(s, s.layer_count);
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) CHECK(!empty.at(y, x));
  }

  for (int split = 1; split <= s.layer_count; ++split) {
    SegmentationMask narrower = figure_ground(s, split);
    SegmentationMask wider = figure_ground(s, split - 1);
    for (int y = 0; y < cam.height; ++y) {
      for (int x = 0; x < cam.width; ++x) {
        if (narrower.at(y, x)) CHECK(wider.at(y, x));
      }
    }
  }

  CHECK_THROWS_AS(figure_ground(s, -1), Error);
  CHECK_THROWS_AS(figure_ground(s, s.layer_count + 1), Error);
}
