// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "gmae/renderer.hpp"
#include "gmae/types.hpp"

namespace gmae {

// How predicted Gaussians are grouped into depth layers.
enum class GroupMode {
  kEqualCount,      // ceil(K / d) Gaussians per group, in depth order
  kEqualDepthWidth, // d uniform depth bins spanning [z_near, z_far]
};

// Depth layering of a Gaussian scene.  cumulative[i] is the render of the
// first i groups (cumulative[0] is background only); a pixel belongs to the
// first layer whose cumulative render changes it by more than threshold in
// any channel, or -1 if no layer ever does.
struct LayerStack {
  int layer_count = 0;
  GroupMode mode = GroupMode::kEqualCount;
  double threshold = 0.0;
  std::vector<int> boundaries;    // Gaussian prefix count per group
  std::vector<Image> cumulative;  // layer_count + 1 renders
  Eigen::MatrixXi layer_index;    // H x W, values in {-1, 0..layer_count-1}
};

// Renders only the first `prefix_count` Gaussians in depth order over the
// background (the same compositing path as a full render).
Image cumulative_render(const Mat& raw, const ScaleClamp& clamp,
                        const CameraConfig& cam, int prefix_count);

LayerStack assign_layers(const Mat& raw, const ScaleClamp& clamp,
                         const CameraConfig& cam, int layers, GroupMode mode,
                         double threshold);

// Boundary map: a pixel is an edge when its layer index differs from any
// 4-neighbor (unassigned pixels participate with index -1).
struct EdgeMap {
  int height = 0;
  int width = 0;
  int layer_count = 0;
  std::vector<uint8_t> edges;  // row-major, 1 = edge

  bool at(int y, int x) const {
    return edges[static_cast<size_t>(y) * width + x] != 0;
  }
};
EdgeMap edge_detect(const LayerStack& stack);

// Binary segmentation: figure = pixels assigned to layer >= split.
// split may range over [0, layer_count]; split == layer_count yields an
// empty figure.
struct SegmentationMask {
  int height = 0;
  int width = 0;
  int split = 0;
  std::vector<uint8_t> mask;  // row-major, 1 = figure

  bool at(int y, int x) const {
    return mask[static_cast<size_t>(y) * width + x] != 0;
  }
};
SegmentationMask figure_ground(const LayerStack& stack, int split);

}  // namespace gmae
