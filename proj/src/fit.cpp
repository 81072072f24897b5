// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/fit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "gmae/gaussians.hpp"
#include "gmae/optimizer.hpp"
#include "gmae/rng.hpp"
#include "gmae/schedule.hpp"

namespace gmae {

namespace {

using nlohmann::json;

constexpr uint64_t kSaltFit = 4'000'000'037ULL;

double logit(double p) { return std::log(p / (1.0 - p)); }

Mat init_raw(const Image& target, const FitConfig& cfg) {
  Rng rng = Rng::stream(cfg.seed, kSaltFit);
  Mat raw(cfg.gaussians, kGaussianDim);
  // Screen stddev that tiles the frame with ~4x overlap, in NDC units.
  const double area = static_cast<double>(target.height) * target.width;
  const double sigma_px =
      std::max(1.0, 2.0 * std::sqrt(area / (M_PI * cfg.gaussians)));
  const double frac = std::clamp(
      sigma_px / (0.5 * target.width) / cfg.scale_clamp, 0.01, 0.9);
  for (int k = 0; k < cfg.gaussians; ++k) {
    const double px = rng.uniform(-0.97, 0.97);
    const double py = rng.uniform(-0.97, 0.97);
    raw(k, 0) = std::atanh(px);
    raw(k, 1) = std::atanh(py);
    raw(k, 2) = std::atanh(rng.uniform(-0.90, 0.90));
    for (int i = 3; i < 6; ++i) {
      raw(k, i) = logit(frac) + rng.uniform(-0.4, 0.4);
    }
    for (int i = 6; i < 10; ++i) raw(k, i) = rng.uniform(-1.0, 1.0);
    // Color from the target pixel under the center.
    const int ix = std::clamp(
        static_cast<int>((px + 1.0) * 0.5 * target.width), 0,
        target.width - 1);
    const int iy = std::clamp(
        static_cast<int>((py + 1.0) * 0.5 * target.height), 0,
        target.height - 1);
    for (int c = 0; c < 3; ++c) {
      raw(k, 10 + c) =
          logit(std::clamp(target.at(iy, ix, c), 0.05, 0.95));
    }
    raw(k, 13) = 0.0;
  }
  return raw;
}

}  // namespace

void FitConfig::validate() const {
  if (gaussians <= 0) throw Error("FitConfig: gaussians must be positive");
  if (steps < 0) throw Error("FitConfig: steps must be non-negative");
  if (base_lr <= 0.0) throw Error("FitConfig: base_lr must be positive");
  if (warmup_steps < 0 || warmup_steps > steps) {
    throw Error("FitConfig: warmup steps must lie within total steps");
  }
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw Error("FitConfig: betas must lie in [0, 1)");
  }
  if (scale_clamp <= 0.0) {
    throw Error("FitConfig: scale_clamp must be positive");
  }
}

FitResult fit_image(const Image& target, const FitConfig& cfg,
                    const CameraConfig& cam, const FitCallback& cb) {
  cfg.validate();
  cam.validate();
  if (target.height != cam.height || target.width != cam.width) {
    throw Error("fit: target size does not match the camera");
  }
  const ScaleClamp clamp{cfg.scale_clamp};
  FitResult res;
  res.raw = init_raw(target, cfg);

  AdamWConfig acfg;
  acfg.beta1 = cfg.beta1;
  acfg.beta2 = cfg.beta2;
  acfg.weight_decay = 0.0;
  AdamW opt({{"fit.raw", &res.raw}}, acfg);

  const double n = 3.0 * target.height * target.width;
  res.losses.reserve(static_cast<size_t>(cfg.steps));
  for (long t = 0; t < cfg.steps; ++t) {
    RenderResult rr = render_gaussians(res.raw, clamp, cam);
    Image diff(target.height, target.width);
    double loss = 0.0;
    for (size_t i = 0; i < diff.data.size(); ++i) {
      const double d = rr.out.image.data[i] - target.data[i];
      loss += d * d;
      diff.data[i] = 2.0 * d / n;
    }
    loss /= n;
    if (!std::isfinite(loss)) {
      throw Error("fit: non-finite loss at step " + std::to_string(t));
    }
    Mat grad =
        render_backward(res.raw, rr.gaussians, rr.screen, cam, clamp, diff);
    const double lr = lr_schedule(t, cfg.base_lr, cfg.warmup_steps, cfg.steps);
    opt.step({&grad}, lr);
    res.losses.push_back(loss);
    if (cb) cb(t, lr, loss);
  }
  return res;
}

void save_raw_json(const RawFile& rf, const std::string& path) {
  if (rf.raw.cols() != kGaussianDim) {
    throw Error("save_raw_json: raw must have 14 columns");
  }
  json rows = json::array();
  for (Eigen::Index r = 0; r < rf.raw.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < kGaussianDim; ++c) row.push_back(rf.raw(r, c));
    rows.push_back(std::move(row));
  }
  json doc{{"image_size", rf.image_size},
           {"scale_clamp", rf.scale_clamp},
           {"gaussians", std::move(rows)}};
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot write '" + path + "'");
  f << doc.dump() << "\n";
}

RawFile load_raw_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FileError("cannot open gaussian file '" + path + "'");
  RawFile rf;
  try {
    json doc = json::parse(f);
    rf.image_size = doc.at("image_size").get<int>();
    rf.scale_clamp = doc.at("scale_clamp").get<double>();
    const json& rows = doc.at("gaussians");
    if (!rows.is_array() || rows.empty()) {
      throw Error("gaussian file '" + path + "': empty gaussian list");
    }
    rf.raw.resize(static_cast<Eigen::Index>(rows.size()), kGaussianDim);
    for (size_t r = 0; r < rows.size(); ++r) {
      const json& row = rows[r];
      if (!row.is_array() || row.size() != kGaussianDim) {
        throw Error("gaussian file '" + path + "': row " + std::to_string(r) +
                    " must have 14 entries");
      }
      for (int c = 0; c < kGaussianDim; ++c) {
        rf.raw(static_cast<Eigen::Index>(r), c) = row[c].get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw Error("invalid gaussian file '" + path + "': " + e.what());
  }
  if (rf.image_size <= 0) {
    throw Error("gaussian file '" + path + "': image_size must be positive");
  }
  if (rf.scale_clamp <= 0.0) {
    throw Error("gaussian file '" + path + "': scale_clamp must be positive");
  }
  if (!rf.raw.allFinite()) {
    throw Error("gaussian file '" + path + "': non-finite values");
  }
  return rf;
}

}  // namespace gmae
