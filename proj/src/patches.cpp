// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/patches.hpp"

namespace gmae {

void PatchGrid::validate() const {
  if (patch <= 0 || height <= 0 || width <= 0) {
    throw Error("PatchGrid: dimensions must be positive");
  }
  if (height % patch != 0 || width % patch != 0) {
    throw Error("PatchGrid: image size " + std::to_string(height) + "x" +
                std::to_string(width) + " not divisible by patch size " +
                std::to_string(patch));
  }
}

Mat patchify(const Image& img, const PatchGrid& grid) {
  grid.validate();
  if (img.height != grid.height || img.width != grid.width) {
    throw Error("patchify: image shape does not match grid");
  }
  Mat tokens(grid.count(), grid.dim());
  for (int t = 0; t < grid.count(); ++t) {
    const int py = (t / grid.cols()) * grid.patch;
    const int px = (t % grid.cols()) * grid.patch;
    int col = 0;
    for (int dy = 0; dy < grid.patch; ++dy) {
      for (int dx = 0; dx < grid.patch; ++dx) {
        for (int c = 0; c < 3; ++c) {
          tokens(t, col++) = img.at(py + dy, px + dx, c);
        }
      }
    }
  }
  return tokens;
}

Image unpatchify(const Mat& tokens, const PatchGrid& grid) {
  grid.validate();
  if (tokens.rows() != grid.count() || tokens.cols() != grid.dim()) {
    throw Error("unpatchify: token matrix shape does not match grid");
  }
  Image img(grid.height, grid.width);
  for (int t = 0; t < grid.count(); ++t) {
    const int py = (t / grid.cols()) * grid.patch;
    const int px = (t % grid.cols()) * grid.patch;
    int col = 0;
    for (int dy = 0; dy < grid.patch; ++dy) {
      for (int dx = 0; dx < grid.patch; ++dx) {
        for (int c = 0; c < 3; ++c) {
          img.at(py + dy, px + dx, c) = tokens(t, col++);
        }
      }
    }
  }
  return img;
}

}  // namespace gmae
