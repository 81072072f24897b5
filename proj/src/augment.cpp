// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/augment.hpp"

#include <algorithm>
#include <cmath>

namespace gmae {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// Clamped bilinear lookup at continuous source coordinate (sx, sy).
double sample_bilinear(const Image& src, double sx, double sy, int c) {
  sx = std::min<double>(src.width - 1, std::max(0.0, sx));
  sy = std::min<double>(src.height - 1, std::max(0.0, sy));
  const int x0 = static_cast<int>(sx);
  const int y0 = static_cast<int>(sy);
  const int x1 = std::min(src.width - 1, x0 + 1);
  const int y1 = std::min(src.height - 1, y0 + 1);
  const double fx = sx - x0;
  const double fy = sy - y0;
  return (1 - fy) * ((1 - fx) * src.at(y0, x0, c) + fx * src.at(y0, x1, c)) +
         fy * ((1 - fx) * src.at(y1, x0, c) + fx * src.at(y1, x1, c));
}

// Inverse-mapped affine warp: out(x) = src(a x + b), mid-gray outside.
Image affine_warp(const Image& src, double a00, double a01, double a10,
                  double a11, double b0, double b1) {
  Image out(src.height, src.width);
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      const double cx = x + 0.5, cy = y + 0.5;
      const double sx = a00 * cx + a01 * cy + b0 - 0.5;
      const double sy = a10 * cx + a11 * cy + b1 - 0.5;
      const bool inside = sx > -1.0 && sx < src.width && sy > -1.0 &&
                          sy < src.height;
      for (int c = 0; c < 3; ++c) {
        out.at(y, x, c) = inside ? sample_bilinear(src, sx, sy, c) : 0.5;
      }
    }
  }
  return out;
}

// PIL-style enhancement: blend between a degenerate image and the original.
template <typename Degenerate>
Image enhance(const Image& img, double factor, Degenerate&& degenerate) {
  Image out(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double d = degenerate(y, x, c);
        out.at(y, x, c) = clamp01(d + factor * (img.at(y, x, c) - d));
      }
    }
  }
  return out;
}

Image op_autocontrast(const Image& img) {
  Image out(img.height, img.width);
  for (int c = 0; c < 3; ++c) {
    double lo = 1.0, hi = 0.0;
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        lo = std::min(lo, img.at(y, x, c));
        hi = std::max(hi, img.at(y, x, c));
      }
    }
    const double span = hi - lo;
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        out.at(y, x, c) =
            span > 0.0 ? (img.at(y, x, c) - lo) / span : img.at(y, x, c);
      }
    }
  }
  return out;
}

Image op_equalize(const Image& img) {
  // Histogram equalization with the PIL lookup-table construction, per
  // channel on an 8-bit quantization.
  Image out(img.height, img.width);
  const int npx = img.height * img.width;
  for (int c = 0; c < 3; ++c) {
    int hist[256] = {0};
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        int v = static_cast<int>(clamp01(img.at(y, x, c)) * 255.0 + 0.5);
        ++hist[std::min(v, 255)];
      }
    }
    int lut[256];
    const int step = (npx - hist[255]) / 255;
    if (step == 0) {
      for (int v = 0; v < 256; ++v) lut[v] = v;
    } else {
      int n = step / 2;
      for (int v = 0; v < 256; ++v) {
        lut[v] = std::min(255, n / step);
        n += hist[v];
      }
    }
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        int v = static_cast<int>(clamp01(img.at(y, x, c)) * 255.0 + 0.5);
        out.at(y, x, c) = lut[std::min(v, 255)] / 255.0;
      }
    }
  }
  return out;
}

double gray_at(const Image& img, int y, int x) {
  return 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) +
         0.114 * img.at(y, x, 2);
}

Image op_sharpness(const Image& img, double factor) {
  // Degenerate image: 3x3 smoothing with the PIL kernel (center weight 5).
  Image smooth = img;
  for (int y = 1; y < img.height - 1; ++y) {
    for (int x = 1; x < img.width - 1; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            acc += img.at(y + dy, x + dx, c) *
                   ((dy == 0 && dx == 0) ? 5.0 : 1.0);
          }
        }
        smooth.at(y, x, c) = acc / 13.0;
      }
    }
  }
  return enhance(img, factor,
                 [&](int y, int x, int c) { return smooth.at(y, x, c); });
}

}  // namespace

Image resize_bilinear(const Image& src, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0) {
    throw Error("resize_bilinear: output size must be positive");
  }
  Image out(out_h, out_w);
  const double sy = static_cast<double>(src.height) / out_h;
  const double sx = static_cast<double>(src.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const double srcx = (x + 0.5) * sx - 0.5;
      const double srcy = (y + 0.5) * sy - 0.5;
      for (int c = 0; c < 3; ++c) {
        out.at(y, x, c) = sample_bilinear(src, srcx, srcy, c);
      }
    }
  }
  return out;
}

Image random_resized_crop_hflip(const Image& img, Rng& rng) {
  const double area = static_cast<double>(img.height) * img.width;
  int cw = img.width, ch = img.height, cx = 0, cy = 0;
  for (int attempt = 0; attempt < 10; ++attempt) {
    const double target = area * rng.uniform(0.6, 1.0);
    const double log_ratio = rng.uniform(std::log(0.75), std::log(4.0 / 3.0));
    const double ratio = std::exp(log_ratio);
    const int w = static_cast<int>(std::lround(std::sqrt(target * ratio)));
    const int h = static_cast<int>(std::lround(std::sqrt(target / ratio)));
    if (w >= 1 && h >= 1 && w <= img.width && h <= img.height) {
      cw = w;
      ch = h;
      cx = rng.range(0, img.width - w + 1);
      cy = rng.range(0, img.height - h + 1);
      break;
    }
  }
  Image out(img.height, img.width);
  const double fx = static_cast<double>(cw) / img.width;
  const double fy = static_cast<double>(ch) / img.height;
  const bool flip = rng.bernoulli(0.5);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const int ox = flip ? img.width - 1 - x : x;
      const double sx = cx + (ox + 0.5) * fx - 0.5;
      const double sy = cy + (y + 0.5) * fy - 0.5;
      for (int c = 0; c < 3; ++c) {
        out.at(y, x, c) = sample_bilinear(img, sx, sy, c);
      }
    }
  }
  return out;
}

Image rand_augment(const Image& img, Rng& rng) {
  Image out = img;
  for (int op_round = 0; op_round < 2; ++op_round) {
    // Magnitude ~ N(9, 0.5) clipped to [0, 10], normalized to [0, 1].
    double mag = std::min(10.0, std::max(0.0, rng.normal(9.0, 0.5))) / 10.0;
    const bool negate = rng.bernoulli(0.5);
    const int op = rng.range(0, 15);
    const double signed_mag = negate ? -mag : mag;
    const double cx = 0.5 * out.width, cy = 0.5 * out.height;
    switch (op) {
      case 0:  // AutoContrast
        out = op_autocontrast(out);
        break;
      case 1:  // Equalize
        out = op_equalize(out);
        break;
      case 2:  // Invert
        for (double& v : out.data) v = 1.0 - v;
        break;
      case 3: {  // Rotate, up to 30 degrees
        const double th = signed_mag * 30.0 * 3.14159265358979323846 / 180.0;
        const double c = std::cos(th), s = std::sin(th);
        out = affine_warp(out, c, -s, s, c, cx - c * cx + s * cy,
                          cy - s * cx - c * cy);
        break;
      }
      case 4: {  // Posterize, keep 8 - 4 * mag bits
        const int bits = 8 - static_cast<int>(std::lround(4.0 * mag));
        const int mask = (0xff << (8 - std::max(1, bits))) & 0xff;
        for (double& v : out.data) {
          int q = static_cast<int>(clamp01(v) * 255.0 + 0.5) & mask;
          v = q / 255.0;
        }
        break;
      }
      case 5: {  // Solarize: invert above threshold
        const double th = 1.0 - mag;
        for (double& v : out.data) {
          if (v >= th) v = 1.0 - v;
        }
        break;
      }
      case 6: {  // SolarizeAdd: brighten below mid-gray
        const double add = mag * 110.0 / 255.0;
        for (double& v : out.data) {
          if (v < 0.5) v = clamp01(v + add);
        }
        break;
      }
      case 7:  // Color (saturation)
        out = enhance(out, 1.0 + signed_mag * 0.9,
                      [&](int y, int x, int) { return gray_at(out, y, x); });
        break;
      case 8: {  // Contrast
        double mean = 0.0;
        for (int y = 0; y < out.height; ++y) {
          for (int x = 0; x < out.width; ++x) mean += gray_at(out, y, x);
        }
        mean /= static_cast<double>(out.height) * out.width;
        out = enhance(out, 1.0 + signed_mag * 0.9,
                      [mean](int, int, int) { return mean; });
        break;
      }
      case 9:  // Brightness
        out = enhance(out, 1.0 + signed_mag * 0.9,
                      [](int, int, int) { return 0.0; });
        break;
      case 10:  // Sharpness
        out = op_sharpness(out, 1.0 + signed_mag * 0.9);
        break;
      case 11:  // ShearX
        out = affine_warp(out, 1.0, signed_mag * 0.3, 0.0, 1.0,
                          -signed_mag * 0.3 * cy, 0.0);
        break;
      case 12:  // ShearY
        out = affine_warp(out, 1.0, 0.0, signed_mag * 0.3, 1.0, 0.0,
                          -signed_mag * 0.3 * cx);
        break;
      case 13:  // TranslateX (relative, up to 45%)
        out = affine_warp(out, 1.0, 0.0, 0.0, 1.0,
                          -signed_mag * 0.45 * out.width, 0.0);
        break;
      case 14:  // TranslateY
        out = affine_warp(out, 1.0, 0.0, 0.0, 1.0, 0.0,
                          -signed_mag * 0.45 * out.height);
        break;
    }
  }
  return out;
}

Image augment(const Image& img, AugmentMode mode, Rng& rng) {
  switch (mode) {
    case AugmentMode::kNone:
      return img;
    case AugmentMode::kBasic:
      return random_resized_crop_hflip(img, rng);
    case AugmentMode::kRandAug: {
      Image cropped = random_resized_crop_hflip(img, rng);
      return rand_augment(cropped, rng);
    }
  }
  throw Error("augment: unknown mode");
}

const char* to_string(AugmentMode mode) {
  switch (mode) {
    case AugmentMode::kNone:
      return "none";
    case AugmentMode::kBasic:
      return "basic";
    case AugmentMode::kRandAug:
      return "randaug";
  }
  return "basic";
}

AugmentMode augment_mode_from_string(const std::string& name) {
  if (name == "none") return AugmentMode::kNone;
  if (name == "basic") return AugmentMode::kBasic;
  if (name == "randaug") return AugmentMode::kRandAug;
  throw Error("unknown augmentation mode '" + name + "'");
}

}  // namespace gmae
