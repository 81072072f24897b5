// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "gmae/rng.hpp"
#include "gmae/types.hpp"

namespace gmae {

// Partition of token indices [0, N) into visible and masked subsets, both
// kept in ascending order.
struct MaskSpec {
  int total = 0;
  std::vector<int> visible;
  std::vector<int> masked;
  std::vector<uint8_t> lookup;  // lookup[t] != 0 iff t is visible

  static MaskSpec from_visible(int total, std::vector<int> visible);
  // All tokens visible; the masked set is empty.  Used at inference.
  static MaskSpec full(int total);
};

// Uniform random mask: keeps n = N - round(ratio * N) tokens visible.
// Requires 0 < ratio < 1 and rejects ratios that would leave zero visible
// or zero masked tokens.
MaskSpec sample_mask(int total, double ratio, Rng& rng);

}  // namespace gmae
