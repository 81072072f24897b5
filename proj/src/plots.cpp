// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/plots.hpp"

#include <algorithm>
#include <cmath>

namespace gmae {

Image scatter_plot(const std::vector<ScatterPoint>& points,
                   const ScatterSpec& spec) {
  if (spec.size < 32) throw Error("scatter_plot: canvas too small");
  if (!(spec.x_max > spec.x_min) || !(spec.y_max > spec.y_min)) {
    throw Error("scatter_plot: empty axis range");
  }
  const int n = spec.size;
  const int margin = 8;
  Image img(n, n, 1.0);  // white canvas
  auto put = [&](int y, int x, double v) {
    if (y < 0 || y >= n || x < 0 || x >= n) return;
    for (int c = 0; c < 3; ++c) img.at(y, x, c) = v;
  };
  // Plot frame.
  for (int i = margin; i < n - margin; ++i) {
    put(margin, i, 0.0);
    put(n - margin - 1, i, 0.0);
    put(i, margin, 0.0);
    put(i, n - margin - 1, 0.0);
  }
  const double span_x = spec.x_max - spec.x_min;
  const double span_y = spec.y_max - spec.y_min;
  const int inner = n - 2 * margin - 2;
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
    const double fx = (p.x - spec.x_min) / span_x;
    const double fy = (p.y - spec.y_min) / span_y;
    if (fx < 0.0 || fx > 1.0 || fy < 0.0 || fy > 1.0) continue;
    const int px = margin + 1 + static_cast<int>(std::lround(fx * (inner - 1)));
    // y axis points up in the plot.
    const int py =
        margin + 1 + static_cast<int>(std::lround((1.0 - fy) * (inner - 1)));
    const double v = std::min(0.8, std::max(0.0, p.shade));
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dy == 0 || dx == 0) put(py + dy, px + dx, v);  // small plus mark
      }
    }
  }
  return img;
}

}  // namespace gmae
