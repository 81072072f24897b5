// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/metrics.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

namespace gmae {

double mse(const Image& a, const Image& b) {
  if (!a.same_shape(b) || a.size() == 0) {
    throw Error("mse: image shapes differ or are empty");
  }
  double sum = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    sum += d * d;
  }
  return sum / a.data.size();
}

double psnr(const Image& a, const Image& b) {
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / m);
}

double iou(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b) {
  if (a.size() != b.size()) throw Error("iou: mask sizes differ");
  long inter = 0, uni = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    const bool pa = a[i] != 0, pb = b[i] != 0;
    inter += pa && pb;
    uni += pa || pb;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
}

double boundary_f1(const std::vector<uint8_t>& pred,
                   const std::vector<uint8_t>& truth, int height, int width,
                   int tol) {
  if (pred.size() != truth.size() ||
      pred.size() != static_cast<size_t>(height) * width) {
    throw Error("boundary_f1: mask sizes do not match dimensions");
  }
  auto dilate = [&](const std::vector<uint8_t>& m) {
    std::vector<uint8_t> out(m.size(), 0);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        if (!m[static_cast<size_t>(y) * width + x]) continue;
        for (int dy = -tol; dy <= tol; ++dy) {
          for (int dx = -tol; dx <= tol; ++dx) {
            const int ny = y + dy, nx = x + dx;
            if (ny >= 0 && ny < height && nx >= 0 && nx < width) {
              out[static_cast<size_t>(ny) * width + nx] = 1;
            }
          }
        }
      }
    }
    return out;
  };
  const auto truth_wide = dilate(truth);
  const auto pred_wide = dilate(pred);
  long n_pred = 0, n_truth = 0, hit_pred = 0, hit_truth = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (pred[i]) {
      ++n_pred;
      hit_pred += truth_wide[i] != 0;
    }
    if (truth[i]) {
      ++n_truth;
      hit_truth += pred_wide[i] != 0;
    }
  }
  if (n_pred == 0 && n_truth == 0) return 1.0;
  if (n_pred == 0 || n_truth == 0) return 0.0;
  const double precision = static_cast<double>(hit_pred) / n_pred;
  const double recall = static_cast<double>(hit_truth) / n_truth;
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

std::string MetricsReport::to_json() const {
  nlohmann::json root = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json row;
    row["name"] = e.name;
    row["mse"] = e.mse;
    if (std::isfinite(e.psnr)) {
      row["psnr"] = e.psnr;
    } else {
      row["psnr"] = "inf";
    }
    if (e.iou) row["iou"] = *e.iou;
    if (e.boundary_f1) row["boundary_f1"] = *e.boundary_f1;
    root.push_back(std::move(row));
  }
  return root.dump(2);
}

void MetricsReport::write(const std::string& path) const {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot write '" + path + "'");
  f << to_json() << "\n";
}

}  // namespace gmae
