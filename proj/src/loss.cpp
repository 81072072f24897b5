// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/loss.hpp"

#include <cmath>

namespace gmae {

namespace {

void check_shapes(const Image& rendered, const Image& target,
                  const MaskSpec& mask, const PatchGrid& grid) {
  grid.validate();
  if (rendered.height != grid.height || rendered.width != grid.width ||
      !rendered.same_shape(target)) {
    throw Error("masked_mse: image shapes do not match the patch grid");
  }
  if (mask.total != grid.count()) {
    throw Error("masked_mse: mask does not match the patch grid");
  }
}

// Normalized value of the target patch covering token t, element (dy,dx,c).
struct PatchStats {
  double mean, inv_std;
};

PatchStats patch_stats(const Image& target, const PatchGrid& grid, int t) {
  const int py = (t / grid.cols()) * grid.patch;
  const int px = (t % grid.cols()) * grid.patch;
  double sum = 0.0, sq = 0.0;
  for (int dy = 0; dy < grid.patch; ++dy) {
    for (int dx = 0; dx < grid.patch; ++dx) {
      for (int c = 0; c < 3; ++c) {
        double v = target.at(py + dy, px + dx, c);
        sum += v;
        sq += v * v;
      }
    }
  }
  const double n = grid.dim();
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  return {mean, 1.0 / std::sqrt(std::max(var, 0.0) + 1e-6)};
}

// Applies fn(y, x, target_value) over the pixels of the selected patches.
template <typename Fn>
void for_selected(const Image& target, const MaskSpec& mask,
                  const PatchGrid& grid, LossMode mode, Fn&& fn) {
  const bool normalized = mode == LossMode::kMaskedNormalized;
  const std::vector<int>* sel = &mask.masked;
  std::vector<int> all;
  if (mode == LossMode::kAll) {
    all.resize(mask.total);
    for (int t = 0; t < mask.total; ++t) all[t] = t;
    sel = &all;
  } else if (mask.masked.empty()) {
    throw Error("masked_mse: masked set is empty");
  }
  for (int t : *sel) {
    const int py = (t / grid.cols()) * grid.patch;
    const int px = (t % grid.cols()) * grid.patch;
    PatchStats st{0.0, 1.0};
    if (normalized) st = patch_stats(target, grid, t);
    for (int dy = 0; dy < grid.patch; ++dy) {
      for (int dx = 0; dx < grid.patch; ++dx) {
        for (int c = 0; c < 3; ++c) {
          double tv = target.at(py + dy, px + dx, c);
          if (normalized) tv = (tv - st.mean) * st.inv_std;
          fn(py + dy, px + dx, c, tv);
        }
      }
    }
  }
}

long selected_count(const MaskSpec& mask, const PatchGrid& grid,
                    LossMode mode) {
  const long patches = mode == LossMode::kAll
                           ? mask.total
                           : static_cast<long>(mask.masked.size());
  return patches * grid.dim();
}

}  // namespace

double masked_mse(const Image& rendered, const Image& target,
                  const MaskSpec& mask, const PatchGrid& grid, LossMode mode) {
  check_shapes(rendered, target, mask, grid);
  double sum = 0.0;
  for_selected(target, mask, grid, mode,
               [&](int y, int x, int c, double tv) {
                 const double d = rendered.at(y, x, c) - tv;
                 sum += d * d;
               });
  return sum / selected_count(mask, grid, mode);
}

Image masked_mse_grad(const Image& rendered, const Image& target,
                      const MaskSpec& mask, const PatchGrid& grid,
                      LossMode mode) {
  check_shapes(rendered, target, mask, grid);
  Image grad(rendered.height, rendered.width);
  const double scale = 2.0 / selected_count(mask, grid, mode);
  for_selected(target, mask, grid, mode,
               [&](int y, int x, int c, double tv) {
                 grad.at(y, x, c) = scale * (rendered.at(y, x, c) - tv);
               });
  return grad;
}

const char* to_string(LossMode mode) {
  switch (mode) {
    case LossMode::kMasked:
      return "masked";
    case LossMode::kAll:
      return "all";
    case LossMode::kMaskedNormalized:
      return "masked_normalized";
  }
  return "masked";
}

LossMode loss_mode_from_string(const std::string& name) {
  if (name == "masked") return LossMode::kMasked;
  if (name == "all") return LossMode::kAll;
  if (name == "masked_normalized") return LossMode::kMaskedNormalized;
  throw Error("unknown loss mode '" + name + "'");
}

}  // namespace gmae
