// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/shapes.hpp"

#include <algorithm>
#include <cmath>

namespace gmae {

namespace {

struct Shape {
  int kind = 0;  // 0 disk, 1 rectangle, 2 triangle
  double cx = 0, cy = 0;
  double r = 0;          // radius / half-extent scale
  double aspect = 1.0;   // rectangle aspect
  double angle = 0.0;    // rectangle / triangle orientation
  double vx[3], vy[3];   // triangle vertices
  double color[3];       // base RGB
  double gx = 0, gy = 0; // shading gradient direction
};

bool inside(const Shape& s, double x, double y) {
  switch (s.kind) {
    case 0: {
      const double dx = x - s.cx, dy = y - s.cy;
      return dx * dx + dy * dy <= s.r * s.r;
    }
    case 1: {
      const double c = std::cos(s.angle), sn = std::sin(s.angle);
      const double dx = x - s.cx, dy = y - s.cy;
      const double u = c * dx + sn * dy;
      const double v = -sn * dx + c * dy;
      return std::abs(u) <= s.r * s.aspect && std::abs(v) <= s.r;
    }
    default: {
      // Consistent-side test against the three edges.
      double sign = 0.0;
      for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3;
        const double cross = (s.vx[j] - s.vx[i]) * (y - s.vy[i]) -
                             (s.vy[j] - s.vy[i]) * (x - s.vx[i]);
        if (cross == 0.0) continue;
        if (sign == 0.0) {
          sign = cross;
        } else if ((sign > 0) != (cross > 0)) {
          return false;
        }
      }
      return true;
    }
  }
}

Shape random_shape(Rng& rng, int size) {
  Shape s;
  s.kind = rng.range(0, 3);
  s.cx = rng.uniform(0.25, 0.75) * size;
  s.cy = rng.uniform(0.25, 0.75) * size;
  s.r = rng.uniform(0.12, 0.30) * size;
  s.aspect = rng.uniform(0.6, 1.6);
  s.angle = rng.uniform(0.0, 3.14159265358979323846);
  if (s.kind == 2) {
    for (int i = 0; i < 3; ++i) {
      const double a = s.angle + 2.0 * 3.14159265358979323846 * i / 3.0 +
                       rng.uniform(-0.5, 0.5);
      const double rr = s.r * rng.uniform(0.7, 1.3);
      s.vx[i] = s.cx + rr * std::cos(a);
      s.vy[i] = s.cy + rr * std::sin(a);
    }
  }
  // Bright, saturated colors so figure pixels separate clearly from the
  // black background.
  const int bright = rng.range(0, 3);
  for (int c = 0; c < 3; ++c) {
    s.color[c] = c == bright ? rng.uniform(0.75, 1.0) : rng.uniform(0.1, 0.8);
  }
  const double ga = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  s.gx = std::cos(ga);
  s.gy = std::sin(ga);
  return s;
}

}  // namespace

ShapeSample make_shape_sample(uint64_t seed, int size) {
  if (size <= 0) throw Error("make_shape_sample: size must be positive");
  Rng rng = Rng::stream(seed, 0x73686170);
  const int n_shapes = rng.bernoulli(0.5) ? 2 : 1;
  std::vector<Shape> shapes;
  for (int i = 0; i < n_shapes; ++i) shapes.push_back(random_shape(rng, size));

  ShapeSample out;
  out.image = Image(size, size, 0.0);
  out.fg_mask.assign(static_cast<size_t>(size) * size, 0);
  constexpr int ss = 4;  // supersampling factor per axis
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double cover_any = 0.0;
      double rgb[3] = {0.0, 0.0, 0.0};
      for (int sy = 0; sy < ss; ++sy) {
        for (int sx = 0; sx < ss; ++sx) {
          const double px = x + (sx + 0.5) / ss;
          const double py = y + (sy + 0.5) / ss;
          // Later shapes paint over earlier ones.
          for (int i = n_shapes - 1; i >= 0; --i) {
            const Shape& s = shapes[i];
            if (!inside(s, px, py)) continue;
            const double shade =
                0.7 + 0.3 * (0.5 + 0.5 * ((px - s.cx) * s.gx +
                                          (py - s.cy) * s.gy) /
                                       std::max(1.0, s.r));
            for (int c = 0; c < 3; ++c) {
              rgb[c] += std::min(1.0, s.color[c] * shade);
            }
            cover_any += 1.0;
            break;
          }
        }
      }
      const double inv = 1.0 / (ss * ss);
      for (int c = 0; c < 3; ++c) out.image.at(y, x, c) = rgb[c] * inv;
      if (cover_any * inv > 0.5) {
        out.fg_mask[static_cast<size_t>(y) * size + x] = 1;
      }
    }
  }
  return out;
}

std::vector<ShapeSample> make_shape_corpus(uint64_t seed, int count,
                                           int size) {
  std::vector<ShapeSample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    out.push_back(make_shape_sample(seed + 1000003ULL * i, size));
  }
  return out;
}

}  // namespace gmae
