// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gmae/types.hpp"

namespace gmae {

double mse(const Image& a, const Image& b);

// 10 * log10(1 / MSE) for images in [0, 1]; identical images give
// +infinity.
double psnr(const Image& a, const Image& b);

// Intersection over union of two binary masks; empty-union pairs give 1.
double iou(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b);

// Boundary F1: precision/recall of predicted edge pixels against ground
// truth, matched within a tol-pixel Chebyshev radius.
double boundary_f1(const std::vector<uint8_t>& pred,
                   const std::vector<uint8_t>& truth, int height, int width,
                   int tol = 1);

// Per-image evaluation rows serialized to JSON.  Non-finite PSNR is written
// as the string "inf" to stay valid JSON.
struct MetricsReport {
  struct Entry {
    std::string name;
    double mse = 0.0;
    double psnr = 0.0;
    std::optional<double> iou;
    std::optional<double> boundary_f1;
  };
  std::vector<Entry> entries;

  std::string to_json() const;
  void write(const std::string& path) const;
};

}  // namespace gmae
