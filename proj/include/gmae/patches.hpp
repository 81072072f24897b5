// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gmae/types.hpp"

namespace gmae {

// Regular non-overlapping patch grid over an H x W image.  Tokens are
// numbered row-major: token t covers patch (t / cols(), t % cols()).
struct PatchGrid {
  int height = 64;
  int width = 64;
  int patch = 8;

  int rows() const { return height / patch; }
  int cols() const { return width / patch; }
  int count() const { return rows() * cols(); }
  int dim() const { return patch * patch * 3; }  // flattened token length

  void validate() const;
};

// Flattens each patch to a row of P*P*3 values in (y, x, channel) order.
Mat patchify(const Image& img, const PatchGrid& grid);

// Exact inverse of patchify.
Image unpatchify(const Mat& tokens, const PatchGrid& grid);

}  // namespace gmae
