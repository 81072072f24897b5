// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/pos_embed.hpp"

#include <cmath>

namespace gmae {

namespace {

// One axis worth of embedding: half sines, half cosines.
void fill_axis(double pos, int half_dim, double* out) {
  const int quarter = half_dim / 2;
  for (int i = 0; i < quarter; ++i) {
    double omega = std::pow(10000.0, -static_cast<double>(i) / quarter);
    out[i] = std::sin(pos * omega);
    out[quarter + i] = std::cos(pos * omega);
  }
}

}  // namespace

Mat sincos_pos_embed(int dim, int rows, int cols) {
  if (dim <= 0 || dim % 4 != 0) {
    throw Error("sincos_pos_embed: dim must be a positive multiple of 4");
  }
  if (rows <= 0 || cols <= 0) {
    throw Error("sincos_pos_embed: grid must be non-empty");
  }
  Mat e(rows * cols, dim);
  std::vector<double> buf(dim);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      fill_axis(static_cast<double>(r), dim / 2, buf.data());
      fill_axis(static_cast<double>(c), dim / 2, buf.data() + dim / 2);
      for (int j = 0; j < dim; ++j) e(r * cols + c, j) = buf[j];
    }
  }
  return e;
}

}  // namespace gmae
