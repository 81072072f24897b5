// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/masking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gmae {

MaskSpec MaskSpec::from_visible(int total, std::vector<int> visible) {
  if (total <= 0) throw Error("MaskSpec: total must be positive");
  MaskSpec m;
  m.total = total;
  std::sort(visible.begin(), visible.end());
  m.lookup.assign(total, 0);
  for (int t : visible) {
    if (t < 0 || t >= total) throw Error("MaskSpec: index out of range");
    if (m.lookup[t]) throw Error("MaskSpec: duplicate visible index");
    m.lookup[t] = 1;
  }
  m.visible = std::move(visible);
  m.masked.reserve(total - m.visible.size());
  for (int t = 0; t < total; ++t) {
    if (!m.lookup[t]) m.masked.push_back(t);
  }
  return m;
}

MaskSpec MaskSpec::full(int total) {
  std::vector<int> all(total);
  std::iota(all.begin(), all.end(), 0);
  return from_visible(total, std::move(all));
}

MaskSpec sample_mask(int total, double ratio, Rng& rng) {
  if (total <= 0) throw Error("sample_mask: total must be positive");
  if (!(ratio > 0.0) || !(ratio < 1.0)) {
    throw Error("sample_mask: ratio must lie strictly between 0 and 1");
  }
  const int n_visible = total - static_cast<int>(std::lround(ratio * total));
  if (n_visible <= 0 || n_visible >= total) {
    throw Error("sample_mask: ratio " + std::to_string(ratio) +
                " leaves no masked or no visible tokens for N = " +
                std::to_string(total));
  }
  std::vector<int> perm(total);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  perm.resize(n_visible);
  return MaskSpec::from_visible(total, std::move(perm));
}

}  // namespace gmae
