// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gmae/types.hpp"

namespace gmae {

// A raw (pre-activation) Gaussian is a row of 14 unconstrained reals:
//   [0:3)   position logits      -> tanh            -> p in (-1, 1)^3
//   [3:6)   scale logits         -> c * sigmoid     -> s in (0, c)^3
//   [6:10)  quaternion logits    -> sigmoid + renorm-> unit q = (w, x, y, z)
//   [10:13) color logits         -> sigmoid         -> rgb in (0, 1)^3
//   [13]    opacity logit        -> sigmoid         -> o in (0, 1)
inline constexpr int kGaussianDim = 14;

// Upper bound c for the activated scales.
struct ScaleClamp {
  double c = 1.0;
};

// Activated, render-ready set of K Gaussians (struct of arrays).
struct GaussianSet {
  Eigen::MatrixX3d centers;      // K x 3, components in (-1, 1)
  Eigen::MatrixX3d scales;       // K x 3, components in (0, c)
  Eigen::MatrixX4d quaternions;  // K x 4, unit rows, (w, x, y, z)
  Eigen::MatrixX3d colors;       // K x 3, components in (0, 1)
  Vec opacities;                 // K, components in (0, 1)

  int count() const { return static_cast<int>(centers.rows()); }

  // Throws Error if any invariant is violated (NaN, range, non-unit
  // quaternion beyond 1e-6, inconsistent row counts).
  void validate(const ScaleClamp& clamp) const;
};

double sigmoid(double x);

// Applies the activations above row by row.  raw must be K x 14 and finite;
// clamp.c must be positive.
GaussianSet activate_parameters(const Mat& raw, const ScaleClamp& clamp);

// Rotation matrix of a unit quaternion (w, x, y, z).  Rejects inputs whose
// norm deviates from 1 by more than 1e-6.
Eigen::Matrix3d quaternion_to_rotation(const Eigen::Vector4d& q);

// World-space covariance Sigma = R S S^T R^T with S = diag(s), s > 0.
Eigen::Matrix3d build_covariance(const Eigen::Vector3d& s,
                                 const Eigen::Vector4d& q);

}  // namespace gmae
