// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmae {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Dense H x W x 3 image, row-major, channels interleaved (RGB), values are
// doubles nominally in [0, 1].  Kept deliberately minimal: the renderer and
// the loss touch raw pointers, everything else goes through at().
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Image() = default;
  Image(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<size_t>(h) * w * 3, fill) {}

  double& at(int y, int x, int c) {
    return data[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
  double at(int y, int x, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
  size_t size() const { return data.size(); }
  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width;
  }
};

// Single-channel H x W plane of doubles (transmittance maps, coverage masks).
struct Plane {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Plane() = default;
  Plane(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}

  double& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  double at(int y, int x) const {
    return data[static_cast<size_t>(y) * width + x];
  }
};

// All recoverable errors thrown by the library derive from this.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A required file is missing or unreadable.  Kept distinct so the CLI can
// exit with a dedicated status code.
struct FileError : Error {
  explicit FileError(const std::string& what) : Error(what) {}
};

}  // namespace gmae
