// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "gmae/rng.hpp"
#include "gmae/types.hpp"

namespace gmae {

// Procedurally generated training scene: one or two bright, shaded shapes
// (disk, rectangle or triangle) on a black background, anti-aliased by 4x4
// supersampling.  fg_mask marks pixels with majority shape coverage.
struct ShapeSample {
  Image image;
  std::vector<uint8_t> fg_mask;  // row-major, 1 = shape
};

ShapeSample make_shape_sample(uint64_t seed, int size = 64);
std::vector<ShapeSample> make_shape_corpus(uint64_t seed, int count,
                                           int size = 64);

}  // namespace gmae
