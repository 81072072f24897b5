// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gmae {

namespace {

constexpr int kTileSize = 16;

// One candidate list per tile, each in depth order.
struct TileLists {
  int tiles_x = 0;
  int tiles_y = 0;
  std::vector<std::vector<int>> lists;
};

// Pixel-index range [lo, hi] touched by a footprint of half-width r around
// screen coordinate m; empty ranges come back with lo > hi.
inline void pixel_range(double m, double r, int limit, int* lo, int* hi) {
  *lo = std::max(0, static_cast<int>(std::ceil(m - r - 0.5)));
  *hi = std::min(limit - 1, static_cast<int>(std::floor(m + r - 0.5)));
}

TileLists build_tile_lists(const ScreenGaussianSet& sg, const CameraConfig& cam,
                           int prefix) {
  TileLists tl;
  tl.tiles_x = (cam.width + kTileSize - 1) / kTileSize;
  tl.tiles_y = (cam.height + kTileSize - 1) / kTileSize;
  tl.lists.resize(static_cast<size_t>(tl.tiles_x) * tl.tiles_y);
  int n = prefix < 0 ? static_cast<int>(sg.order.size())
                     : std::min<int>(prefix, static_cast<int>(sg.order.size()));
  for (int rank = 0; rank < n; ++rank) {
    int i = sg.order[rank];
    if (sg.skipped[i]) continue;
    // Axis-aligned support bound: q <= cutoff^2 implies
    // |dx| <= cutoff * sqrt(cov_xx) and likewise for y.  The extra half
    // pixel absorbs floating-point rounding at the boundary; pixels beyond
    // the true support still fail the q test, so the result is unchanged.
    double rx = cam.cutoff * std::sqrt(sg.cov[i](0, 0)) + 0.5;
    double ry = cam.cutoff * std::sqrt(sg.cov[i](1, 1)) + 0.5;
    int x0, x1, y0, y1;
    pixel_range(sg.means(i, 0), rx, cam.width, &x0, &x1);
    pixel_range(sg.means(i, 1), ry, cam.height, &y0, &y1);
    if (x0 > x1 || y0 > y1) continue;
    for (int ty = y0 / kTileSize; ty <= y1 / kTileSize; ++ty) {
      for (int tx = x0 / kTileSize; tx <= x1 / kTileSize; ++tx) {
        tl.lists[static_cast<size_t>(ty) * tl.tiles_x + tx].push_back(i);
      }
    }
  }
  return tl;
}

// Shared compositing kernel.  Walking the same candidate sequence with the
// same arithmetic is what makes naive and tiled renders bitwise equal.
inline void composite_pixel(int px, int py, const std::vector<int>& cands,
                            const ScreenGaussianSet& sg,
                            const Eigen::MatrixX3d& colors,
                            const Vec& opacities, const CameraConfig& cam,
                            Image* image, Plane* transmittance,
                            std::vector<long>* touch) {
  const double cx = px + 0.5;
  const double cy = py + 0.5;
  const double cutoff2 = cam.cutoff * cam.cutoff;
  double T = 1.0;
  double r = 0.0, g = 0.0, b = 0.0;
  for (int i : cands) {
    const double dx = cx - sg.means(i, 0);
    const double dy = cy - sg.means(i, 1);
    const Eigen::Matrix2d& ic = sg.inv_cov[i];
    const double q =
        ic(0, 0) * dx * dx + 2.0 * ic(0, 1) * dx * dy + ic(1, 1) * dy * dy;
    if (q > cutoff2) continue;
    const double alpha =
        std::min(kAlphaMax, opacities(i) * std::exp(-0.5 * q));
    const double w = alpha * T;
    r += colors(i, 0) * w;
    g += colors(i, 1) * w;
    b += colors(i, 2) * w;
    if (touch) ++(*touch)[i];
    T *= 1.0 - alpha;
  }
  image->at(py, px, 0) = r + T * cam.background(0);
  image->at(py, px, 1) = g + T * cam.background(1);
  image->at(py, px, 2) = b + T * cam.background(2);
  transmittance->at(py, px) = T;
}

void check_inputs(const ScreenGaussianSet& sg, const Eigen::MatrixX3d& colors,
                  const Vec& opacities, const CameraConfig& cam) {
  cam.validate();
  if (colors.rows() != sg.count() || opacities.size() != sg.count()) {
    throw Error("render: colors/opacities do not match Gaussian count");
  }
}

}  // namespace

void CameraConfig::validate() const {
  if (height <= 0 || width <= 0) {
    throw Error("CameraConfig: image dimensions must be positive");
  }
  if (!(z_far > z_near)) {
    throw Error("CameraConfig: z_far must exceed z_near");
  }
  if (!(lowpass >= 0.0) || !std::isfinite(lowpass)) {
    throw Error("CameraConfig: lowpass must be non-negative");
  }
  if (!(cutoff > 0.0)) {
    throw Error("CameraConfig: cutoff must be positive");
  }
  if (!background.allFinite()) {
    throw Error("CameraConfig: non-finite background");
  }
}

ScreenGaussianSet project(const GaussianSet& g, const CameraConfig& cam) {
  cam.validate();
  const int k = g.count();
  ScreenGaussianSet sg;
  sg.means.resize(k, 2);
  sg.cov.resize(k);
  sg.inv_cov.resize(k);
  sg.depths.resize(k);
  sg.skipped.assign(k, 0);
  const double sx = 0.5 * cam.width;
  const double sy = 0.5 * cam.height;
  for (int i = 0; i < k; ++i) {
    sg.means(i, 0) = (g.centers(i, 0) + 1.0) * sx;
    sg.means(i, 1) = (g.centers(i, 1) + 1.0) * sy;
    sg.depths(i) = cam.depth_of(g.centers(i, 2));
    Eigen::Matrix3d sigma = build_covariance(
        g.scales.row(i).transpose(), g.quaternions.row(i).transpose());
    Eigen::Matrix2d c2;
    c2(0, 0) = sx * sx * sigma(0, 0) + cam.lowpass;
    c2(0, 1) = sx * sy * sigma(0, 1);
    c2(1, 0) = c2(0, 1);
    c2(1, 1) = sy * sy * sigma(1, 1) + cam.lowpass;
    sg.cov[i] = c2;
    // Eigenvalues of the symmetric 2 x 2: mean +- sqrt(gap^2 + b^2).
    double mean = 0.5 * (c2(0, 0) + c2(1, 1));
    double disc = std::hypot(0.5 * (c2(0, 0) - c2(1, 1)), c2(0, 1));
    double lo = mean - disc;
    double hi = mean + disc;
    double det = c2(0, 0) * c2(1, 1) - c2(0, 1) * c2(0, 1);
    bool degenerate = !std::isfinite(sg.means(i, 0)) ||
                      !std::isfinite(sg.means(i, 1)) ||
                      !std::isfinite(sg.depths(i)) || !c2.allFinite() ||
                      lo <= 0.0 || det <= 0.0 || hi / lo > 1e12;
    if (degenerate) {
      sg.skipped[i] = 1;
      ++sg.degenerate_count;
      sg.inv_cov[i].setZero();
      // A non-finite depth would break the strict weak ordering of the
      // depth sort; skipped entries sort to the back instead.
      if (!std::isfinite(sg.depths(i))) {
        sg.depths(i) = std::numeric_limits<double>::infinity();
      }
      continue;
    }
    Eigen::Matrix2d inv;
    inv(0, 0) = c2(1, 1) / det;
    inv(1, 1) = c2(0, 0) / det;
    inv(0, 1) = -c2(0, 1) / det;
    inv(1, 0) = inv(0, 1);
    sg.inv_cov[i] = inv;
  }
  sg.order.resize(k);
  std::iota(sg.order.begin(), sg.order.end(), 0);
  std::sort(sg.order.begin(), sg.order.end(), [&](int a, int b) {
    if (sg.depths(a) != sg.depths(b)) return sg.depths(a) < sg.depths(b);
    return a < b;
  });
  return sg;
}

RenderOutput render_naive(const ScreenGaussianSet& sg,
                          const Eigen::MatrixX3d& colors, const Vec& opacities,
                          const CameraConfig& cam, int prefix) {
  check_inputs(sg, colors, opacities, cam);
  RenderOutput out;
  out.image = Image(cam.height, cam.width);
  out.transmittance = Plane(cam.height, cam.width);
  out.touch_counts.assign(sg.count(), 0);
  int n = prefix < 0 ? static_cast<int>(sg.order.size())
                     : std::min<int>(prefix, static_cast<int>(sg.order.size()));
  std::vector<int> cands;
  cands.reserve(n);
  for (int rank = 0; rank < n; ++rank) {
    int i = sg.order[rank];
    if (!sg.skipped[i]) cands.push_back(i);
  }
  for (int py = 0; py < cam.height; ++py) {
    for (int px = 0; px < cam.width; ++px) {
      composite_pixel(px, py, cands, sg, colors, opacities, cam, &out.image,
                      &out.transmittance, &out.touch_counts);
    }
  }
  return out;
}

RenderOutput render_tiled(const ScreenGaussianSet& sg,
                          const Eigen::MatrixX3d& colors, const Vec& opacities,
                          const CameraConfig& cam, int prefix) {
  check_inputs(sg, colors, opacities, cam);
  RenderOutput out;
  out.image = Image(cam.height, cam.width);
  out.transmittance = Plane(cam.height, cam.width);
  out.touch_counts.assign(sg.count(), 0);
  TileLists tl = build_tile_lists(sg, cam, prefix);
  for (int ty = 0; ty < tl.tiles_y; ++ty) {
    for (int tx = 0; tx < tl.tiles_x; ++tx) {
      const auto& cands = tl.lists[static_cast<size_t>(ty) * tl.tiles_x + tx];
      int y1 = std::min(cam.height, (ty + 1) * kTileSize);
      int x1 = std::min(cam.width, (tx + 1) * kTileSize);
      for (int py = ty * kTileSize; py < y1; ++py) {
        for (int px = tx * kTileSize; px < x1; ++px) {
          composite_pixel(px, py, cands, sg, colors, opacities, cam,
                          &out.image, &out.transmittance, &out.touch_counts);
        }
      }
    }
  }
  return out;
}

namespace {

// Forward state of one composited Gaussian at one pixel, stashed for the
// reverse sweep.
struct Contrib {
  int idx;
  double dx, dy;   // pixel center minus screen mean
  double q;        // Mahalanobis distance squared
  double weight;   // exp(-q / 2)
  double alpha;    // min(kAlphaMax, opacity * weight)
  double T;        // transmittance in front of this Gaussian
  bool clamped;
};

// d rotation / d quaternion component, for unit q = (w, x, y, z).
void rotation_jacobian(const Eigen::Vector4d& q, Eigen::Matrix3d dr[4]) {
  const double w = q(0), x = q(1), y = q(2), z = q(3);
  dr[0] << 0, -z, y, z, 0, -x, -y, x, 0;
  dr[1] << 0, y, z, y, -2 * x, -w, z, w, -2 * x;
  dr[2] << -2 * y, x, w, x, 0, z, -w, z, -2 * y;
  dr[3] << -2 * z, -w, x, w, -2 * z, y, x, y, 0;
  for (int j = 0; j < 4; ++j) dr[j] *= 2.0;
}

}  // namespace

Mat render_backward(const Mat& raw, const GaussianSet& g,
                    const ScreenGaussianSet& sg, const CameraConfig& cam,
                    const ScaleClamp& clamp, const Image& grad_image) {
  cam.validate();
  const int k = g.count();
  if (raw.rows() != k || raw.cols() != kGaussianDim) {
    throw Error("render_backward: raw parameters do not match Gaussian count");
  }
  if (grad_image.height != cam.height || grad_image.width != cam.width) {
    throw Error("render_backward: grad_image shape mismatch");
  }
  for (size_t j = 0; j < grad_image.data.size(); ++j) {
    if (!std::isfinite(grad_image.data[j])) {
      throw Error("render_backward: non-finite grad_image at element " +
                  std::to_string(j));
    }
  }

  // Per-Gaussian screen-space accumulators.
  Eigen::MatrixX3d g_color = Eigen::MatrixX3d::Zero(k, 3);
  Vec g_opac = Vec::Zero(k);
  Eigen::MatrixX2d g_mean = Eigen::MatrixX2d::Zero(k, 2);
  std::vector<Eigen::Matrix2d> g_quad(k, Eigen::Matrix2d::Zero());

  const double cutoff2 = cam.cutoff * cam.cutoff;
  TileLists tl = build_tile_lists(sg, cam, -1);
  std::vector<Contrib> contribs;
  for (int ty = 0; ty < tl.tiles_y; ++ty) {
    for (int tx = 0; tx < tl.tiles_x; ++tx) {
      const auto& cands = tl.lists[static_cast<size_t>(ty) * tl.tiles_x + tx];
      if (cands.empty()) continue;
      int y1 = std::min(cam.height, (ty + 1) * kTileSize);
      int x1 = std::min(cam.width, (tx + 1) * kTileSize);
      for (int py = ty * kTileSize; py < y1; ++py) {
        for (int px = tx * kTileSize; px < x1; ++px) {
          const double cx = px + 0.5;
          const double cy = py + 0.5;
          const Eigen::Vector3d gc(grad_image.at(py, px, 0),
                                   grad_image.at(py, px, 1),
                                   grad_image.at(py, px, 2));
          if (gc.isZero(0.0)) continue;
          // Forward replay for this pixel.
          contribs.clear();
          double T = 1.0;
          for (int i : cands) {
            const double dx = cx - sg.means(i, 0);
            const double dy = cy - sg.means(i, 1);
            const Eigen::Matrix2d& ic = sg.inv_cov[i];
            const double q = ic(0, 0) * dx * dx + 2.0 * ic(0, 1) * dx * dy +
                             ic(1, 1) * dy * dy;
            if (q > cutoff2) continue;
            const double w = std::exp(-0.5 * q);
            const double a = std::min(kAlphaMax, g.opacities(i) * w);
            contribs.push_back(
                {i, dx, dy, q, w, a, T, g.opacities(i) * w > kAlphaMax});
            T *= 1.0 - a;
          }
          // Reverse sweep.  B accumulates gc . (suffix contributions behind
          // the current Gaussian, including background), so that
          // d loss / d alpha_j = gc . color_j * T_j - B_j / (1 - alpha_j).
          double B = gc.dot(cam.background) * T;
          for (auto it = contribs.rbegin(); it != contribs.rend(); ++it) {
            const Contrib& c = *it;
            const double gdotc = gc.dot(g.colors.row(c.idx).transpose());
            const double d_alpha = gdotc * c.T - B / (1.0 - c.alpha);
            g_color.row(c.idx) += (c.alpha * c.T) * gc.transpose();
            B += gdotc * c.alpha * c.T;
            if (c.clamped) continue;  // alpha locally constant at the clamp
            g_opac(c.idx) += d_alpha * c.weight;
            const double gq = -0.5 * d_alpha * g.opacities(c.idx) * c.weight;
            const Eigen::Matrix2d& ic = sg.inv_cov[c.idx];
            const double ldx = ic(0, 0) * c.dx + ic(0, 1) * c.dy;
            const double ldy = ic(1, 0) * c.dx + ic(1, 1) * c.dy;
            g_mean(c.idx, 0) += gq * (-2.0 * ldx);
            g_mean(c.idx, 1) += gq * (-2.0 * ldy);
            Eigen::Matrix2d dd;
            dd(0, 0) = c.dx * c.dx;
            dd(0, 1) = c.dx * c.dy;
            dd(1, 0) = dd(0, 1);
            dd(1, 1) = c.dy * c.dy;
            g_quad[c.idx] += gq * dd;
          }
        }
      }
    }
  }

  // Chain screen-space gradients back to the 14 raw parameters.
  Mat grad = Mat::Zero(k, kGaussianDim);
  const double sx = 0.5 * cam.width;
  const double sy = 0.5 * cam.height;
  const double dscale[2] = {sx, sy};
  for (int i = 0; i < k; ++i) {
    if (sg.skipped[i]) continue;
    // q = d^T Lambda d with Lambda = inv(cov2); d loss / d cov2 through the
    // inverse is -Lambda A Lambda where A sums gq * d d^T over pixels.
    const Eigen::Matrix2d& lam = sg.inv_cov[i];
    Eigen::Matrix2d g_cov2 = -lam * g_quad[i] * lam;
    // Screen covariance is D Sigma_tl D + lowpass I, elementwise in the
    // top-left 2 x 2 block of the world covariance.
    Eigen::Matrix3d g_sigma = Eigen::Matrix3d::Zero();
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        g_sigma(a, b) = dscale[a] * dscale[b] * g_cov2(a, b);
      }
    }
    // Sigma = M M^T with M = R diag(s); g_sigma is symmetric, so
    // dM = 2 g_sigma M.
    const Eigen::Vector4d quat = g.quaternions.row(i).transpose();
    const Eigen::Vector3d s = g.scales.row(i).transpose();
    Eigen::Matrix3d rot = quaternion_to_rotation(quat);
    Eigen::Matrix3d m = rot * s.asDiagonal();
    Eigen::Matrix3d g_m = 2.0 * g_sigma * m;
    Eigen::Vector3d g_s;
    for (int j = 0; j < 3; ++j) g_s(j) = rot.col(j).dot(g_m.col(j));
    Eigen::Matrix3d g_rot = g_m * s.asDiagonal();
    Eigen::Matrix3d dr[4];
    rotation_jacobian(quat, dr);
    Eigen::Vector4d g_quat;
    for (int j = 0; j < 4; ++j) {
      g_quat(j) = (g_rot.array() * dr[j].array()).sum();
    }
    // Normalization: quat = v / |v| with v = sigmoid(raw logits).
    Eigen::Vector4d v;
    for (int j = 0; j < 4; ++j) v(j) = sigmoid(raw(i, 6 + j));
    const double vnorm = v.norm();
    Eigen::Vector4d g_v = (g_quat - quat.dot(g_quat) * quat) / vnorm;
    for (int j = 0; j < 4; ++j) {
      grad(i, 6 + j) = g_v(j) * v(j) * (1.0 - v(j));
    }
    // Positions: screen mean is (p + 1) * scale with p = tanh(raw); the
    // depth coordinate orders compositing only and gets no gradient.
    grad(i, 0) = g_mean(i, 0) * sx * (1.0 - g.centers(i, 0) * g.centers(i, 0));
    grad(i, 1) = g_mean(i, 1) * sy * (1.0 - g.centers(i, 1) * g.centers(i, 1));
    grad(i, 2) = 0.0;
    // Scales: s = c * sigmoid(raw); ds/draw = s (1 - s / c).
    for (int j = 0; j < 3; ++j) {
      grad(i, 3 + j) = g_s(j) * s(j) * (1.0 - s(j) / clamp.c);
    }
    // Colors and opacity: plain sigmoids.
    for (int j = 0; j < 3; ++j) {
      const double col = g.colors(i, j);
      grad(i, 10 + j) = g_color(i, j) * col * (1.0 - col);
    }
    grad(i, 13) = g_opac(i) * g.opacities(i) * (1.0 - g.opacities(i));
  }
  return grad;
}

RenderResult render_gaussians(const Mat& raw, const ScaleClamp& clamp,
                              const CameraConfig& cam, int prefix) {
  RenderResult r;
  r.gaussians = activate_parameters(raw, clamp);
  r.screen = project(r.gaussians, cam);
  r.out = render_tiled(r.screen, r.gaussians.colors, r.gaussians.opacities,
                       cam, prefix);
  return r;
}

}  // namespace gmae
