// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gmae/rng.hpp"
#include "gmae/types.hpp"

namespace gmae {

enum class AugmentMode {
  kNone,
  kBasic,    // random resized crop + horizontal flip
  kRandAug,  // basic crop/flip followed by RandAugment(2 ops, M = 9, std 0.5)
};

// Bilinear resize (used by augmentation and by tests).
Image resize_bilinear(const Image& src, int out_h, int out_w);

// Random resized crop (area in [0.6, 1.0], aspect in [3/4, 4/3]) back to the
// source size, then a coin-flip horizontal mirror.
Image random_resized_crop_hflip(const Image& img, Rng& rng);

// RandAugment with two ops drawn from the standard 15-op set, magnitude
// sampled from N(9, 0.5) clipped to [0, 10].  Geometric ops fill with
// mid-gray.
Image rand_augment(const Image& img, Rng& rng);

Image augment(const Image& img, AugmentMode mode, Rng& rng);

const char* to_string(AugmentMode mode);
AugmentMode augment_mode_from_string(const std::string& name);

}  // namespace gmae
