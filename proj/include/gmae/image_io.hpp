// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gmae/types.hpp"

namespace gmae {

// Decodes PNG/JPEG/etc. to RGB doubles in [0, 1]; 8-bit files divide by 255,
// 16-bit by 65535.  Missing or undecodable files throw.
Image load_image(const std::string& path);

// load_image followed by a bilinear resize to size x size.
Image load_image_resized(const std::string& path, int size);

// 8-bit RGB PNG; values are clamped to [0, 1] and rounded.
void save_image_png(const Image& img, const std::string& path);

// Single-channel 16-bit PNG (layer maps).
void save_gray16_png(const std::vector<uint16_t>& values, int height,
                     int width, const std::string& path);

// Single-channel 8-bit PNG (binary masks; nonzero input -> 255).
void save_mask_png(const std::vector<uint8_t>& mask, int height, int width,
                   const std::string& path);

// Binary PBM (P4), 1 bit per pixel, nonzero input -> black.
void save_pbm(const std::vector<uint8_t>& bits, int height, int width,
              const std::string& path);

}  // namespace gmae
