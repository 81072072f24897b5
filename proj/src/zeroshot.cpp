// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/zeroshot.hpp"

#include <cmath>

namespace gmae {

Image cumulative_render(const Mat& raw, const ScaleClamp& clamp,
                        const CameraConfig& cam, int prefix_count) {
  if (prefix_count < 0 || prefix_count > raw.rows()) {
    throw Error("cumulative_render: prefix count out of range");
  }
  return render_gaussians(raw, clamp, cam, prefix_count).out.image;
}

LayerStack assign_layers(const Mat& raw, const ScaleClamp& clamp,
                         const CameraConfig& cam, int layers, GroupMode mode,
                         double threshold) {
  const int k = static_cast<int>(raw.rows());
  if (layers < 1) throw Error("assign_layers: need at least one layer");
  if (!(threshold >= 0.0)) {
    throw Error("assign_layers: threshold must be non-negative");
  }
  if (k < 1) throw Error("assign_layers: empty Gaussian set");
  if (mode == GroupMode::kEqualCount && layers > k) {
    throw Error("assign_layers: more layers than Gaussians");
  }

  GaussianSet g = activate_parameters(raw, clamp);
  ScreenGaussianSet sg = project(g, cam);

  LayerStack stack;
  stack.layer_count = layers;
  stack.mode = mode;
  stack.threshold = threshold;
  stack.boundaries.assign(layers, 0);
  if (mode == GroupMode::kEqualCount) {
    const int group = (k + layers - 1) / layers;
    for (int n = 0; n < layers; ++n) {
      stack.boundaries[n] = std::min(k, (n + 1) * group);
    }
  } else {
    // Uniform depth bins; the depth-sorted order makes bin membership a
    // prefix property.
    const double width = (cam.z_far - cam.z_near) / layers;
    std::vector<int> per_bin(layers, 0);
    for (int i = 0; i < k; ++i) {
      int bin = static_cast<int>((sg.depths(i) - cam.z_near) / width);
      bin = std::max(0, std::min(layers - 1, bin));
      ++per_bin[bin];
    }
    int run = 0;
    for (int n = 0; n < layers; ++n) {
      run += per_bin[n];
      stack.boundaries[n] = run;
    }
  }

  stack.cumulative.reserve(layers + 1);
  stack.cumulative.push_back(
      render_tiled(sg, g.colors, g.opacities, cam, 0).image);
  for (int n = 0; n < layers; ++n) {
    stack.cumulative.push_back(
        render_tiled(sg, g.colors, g.opacities, cam, stack.boundaries[n])
            .image);
  }

  stack.layer_index = Eigen::MatrixXi::Constant(cam.height, cam.width, -1);
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      for (int n = 0; n < layers; ++n) {
        const Image& prev = stack.cumulative[n];
        const Image& cur = stack.cumulative[n + 1];
        double delta = 0.0;
        for (int c = 0; c < 3; ++c) {
          delta = std::max(delta, std::abs(cur.at(y, x, c) - prev.at(y, x, c)));
        }
        if (delta > threshold) {
          stack.layer_index(y, x) = n;
          break;
        }
      }
    }
  }
  return stack;
}

EdgeMap edge_detect(const LayerStack& stack) {
  if (stack.cumulative.empty()) throw Error("edge_detect: empty layer stack");
  EdgeMap e;
  e.height = static_cast<int>(stack.layer_index.rows());
  e.width = static_cast<int>(stack.layer_index.cols());
  e.layer_count = stack.layer_count;
  e.edges.assign(static_cast<size_t>(e.height) * e.width, 0);
  constexpr int dy[4] = {-1, 1, 0, 0};
  constexpr int dx[4] = {0, 0, -1, 1};
  for (int y = 0; y < e.height; ++y) {
    for (int x = 0; x < e.width; ++x) {
      const int here = stack.layer_index(y, x);
      for (int n = 0; n < 4; ++n) {
        const int ny = y + dy[n], nx = x + dx[n];
        if (ny < 0 || ny >= e.height || nx < 0 || nx >= e.width) continue;
        if (stack.layer_index(ny, nx) != here) {
          e.edges[static_cast<size_t>(y) * e.width + x] = 1;
          break;
        }
      }
    }
  }
  return e;
}

SegmentationMask figure_ground(const LayerStack& stack, int split) {
  if (split < 0 || split > stack.layer_count) {
    throw Error("figure_ground: split must lie in [0, layer_count]");
  }
  SegmentationMask m;
  m.height = static_cast<int>(stack.layer_index.rows());
  m.width = static_cast<int>(stack.layer_index.cols());
  m.split = split;
  m.mask.assign(static_cast<size_t>(m.height) * m.width, 0);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      const int layer = stack.layer_index(y, x);
      if (layer >= split) {
        m.mask[static_cast<size_t>(y) * m.width + x] = 1;
      }
    }
  }
  return m;
}

}  // namespace gmae
