// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gmae/masking.hpp"
#include "gmae/patches.hpp"
#include "gmae/types.hpp"

namespace gmae {

enum class LossMode {
  kMasked,            // mean squared error over pixels of masked patches
  kAll,               // mean squared error over every pixel
  kMaskedNormalized,  // masked patches, target normalized per patch
};

// Mean over the selected (pixel, channel) values of (rendered - target)^2.
// In kMaskedNormalized the target patch is standardized to zero mean and
// unit variance (eps 1e-6) before comparison; the rendered image is not.
// Modes that select masked patches reject an empty masked set.
double masked_mse(const Image& rendered, const Image& target,
                  const MaskSpec& mask, const PatchGrid& grid, LossMode mode);

// d masked_mse / d rendered; zero outside the selected pixels.
Image masked_mse_grad(const Image& rendered, const Image& target,
                      const MaskSpec& mask, const PatchGrid& grid,
                      LossMode mode);

const char* to_string(LossMode mode);
LossMode loss_mode_from_string(const std::string& name);

}  // namespace gmae
