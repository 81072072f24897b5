// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/gaussians.hpp"

#include <cmath>

namespace gmae {

double sigmoid(double x) {
  // Split on sign to avoid overflow in exp for large |x|.
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

void GaussianSet::validate(const ScaleClamp& clamp) const {
  const auto k = centers.rows();
  if (scales.rows() != k || quaternions.rows() != k || colors.rows() != k ||
      opacities.size() != k) {
    throw Error("GaussianSet: inconsistent row counts");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  for (Eigen::Index i = 0; i < k; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (!finite(centers(i, j)) || std::abs(centers(i, j)) > 1.0) {
        throw Error("GaussianSet: center out of [-1, 1] at row " +
                    std::to_string(i));
      }
      if (!finite(scales(i, j)) || scales(i, j) <= 0.0 ||
          scales(i, j) > clamp.c) {
        throw Error("GaussianSet: scale out of (0, c] at row " +
                    std::to_string(i));
      }
      if (!finite(colors(i, j)) || colors(i, j) < 0.0 || colors(i, j) > 1.0) {
        throw Error("GaussianSet: color out of [0, 1] at row " +
                    std::to_string(i));
      }
    }
    double n = quaternions.row(i).norm();
    if (!finite(n) || std::abs(n - 1.0) > 1e-6) {
      throw Error("GaussianSet: non-unit quaternion at row " +
                  std::to_string(i));
    }
    if (!finite(opacities(i)) || opacities(i) < 0.0 || opacities(i) > 1.0) {
      throw Error("GaussianSet: opacity out of [0, 1] at row " +
                  std::to_string(i));
    }
  }
}

GaussianSet activate_parameters(const Mat& raw, const ScaleClamp& clamp) {
  if (raw.cols() != kGaussianDim) {
    throw Error("activate_parameters: expected " +
                std::to_string(kGaussianDim) + " columns, got " +
                std::to_string(raw.cols()));
  }
  if (!(clamp.c > 0.0) || !std::isfinite(clamp.c)) {
    throw Error("activate_parameters: scale clamp must be positive");
  }
  if (!raw.allFinite()) {
    throw Error("activate_parameters: non-finite raw parameters");
  }
  const auto k = raw.rows();
  GaussianSet g;
  g.centers.resize(k, 3);
  g.scales.resize(k, 3);
  g.quaternions.resize(k, 4);
  g.colors.resize(k, 3);
  g.opacities.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (int j = 0; j < 3; ++j) {
      g.centers(i, j) = std::tanh(raw(i, j));
      g.scales(i, j) = clamp.c * sigmoid(raw(i, 3 + j));
      g.colors(i, j) = sigmoid(raw(i, 10 + j));
    }
    Eigen::Vector4d v;
    for (int j = 0; j < 4; ++j) v(j) = sigmoid(raw(i, 6 + j));
    // sigmoid outputs are in (0, 1), so the norm is always positive.
    g.quaternions.row(i) = v / v.norm();
    g.opacities(i) = sigmoid(raw(i, 13));
  }
  return g;
}

Eigen::Matrix3d quaternion_to_rotation(const Eigen::Vector4d& q) {
  double n = q.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-6) {
    throw Error("quaternion_to_rotation: quaternion norm " +
                std::to_string(n) + " is not 1");
  }
  const double w = q(0), x = q(1), y = q(2), z = q(3);
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Eigen::Matrix3d build_covariance(const Eigen::Vector3d& s,
                                 const Eigen::Vector4d& q) {
  if (!(s.minCoeff() > 0.0)) {
    throw Error("build_covariance: scales must be positive");
  }
  Eigen::Matrix3d r = quaternion_to_rotation(q);
  Eigen::Matrix3d m = r * s.asDiagonal();  // M = R S, Sigma = M M^T
  return m * m.transpose();
}

}  // namespace gmae
