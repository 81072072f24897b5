// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gmae/types.hpp"

namespace gmae {

// Fixed 2D sine-cosine positional embedding on a rows x cols token grid.
// Row-major token order; the first dim/2 channels encode the row position,
// the rest the column position, each as [sin(p * w_i), cos(p * w_i)] with
// w_i = 10000^(-4i/dim).  dim must be divisible by 4.
Mat sincos_pos_embed(int dim, int rows, int cols);

}  // namespace gmae
