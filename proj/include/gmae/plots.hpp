// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "gmae/types.hpp"

namespace gmae {

// Minimal scatter rasterizer for diagnostic output; no external plotting
// dependency.  shade 0 draws black, 1 draws light gray.
struct ScatterPoint {
  double x = 0.0;
  double y = 0.0;
  double shade = 0.0;
};

struct ScatterSpec {
  std::string title;  // drawn as a top border strip only (no font rendering)
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
  int size = 256;
};

Image scatter_plot(const std::vector<ScatterPoint>& points,
                   const ScatterSpec& spec);

}  // namespace gmae
