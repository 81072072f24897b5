// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/image_io.hpp"

#include <algorithm>
#include <fstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace gmae {

Image load_image(const std::string& path) {
  cv::Mat m = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (m.empty()) {
    throw FileError("cannot read image '" + path + "'");
  }
  if (m.channels() == 1) {
    cv::cvtColor(m, m, cv::COLOR_GRAY2BGR);
  } else if (m.channels() == 4) {
    cv::cvtColor(m, m, cv::COLOR_BGRA2BGR);
  }
  double scale;
  if (m.depth() == CV_8U) {
    scale = 1.0 / 255.0;
  } else if (m.depth() == CV_16U) {
    scale = 1.0 / 65535.0;
  } else {
    throw Error("unsupported bit depth in '" + path + "'");
  }
  Image out(m.rows, m.cols);
  for (int y = 0; y < m.rows; ++y) {
    for (int x = 0; x < m.cols; ++x) {
      // OpenCV loads BGR.
      if (m.depth() == CV_8U) {
        const auto& px = m.at<cv::Vec3b>(y, x);
        out.at(y, x, 0) = px[2] * scale;
        out.at(y, x, 1) = px[1] * scale;
        out.at(y, x, 2) = px[0] * scale;
      } else {
        const auto& px = m.at<cv::Vec3w>(y, x);
        out.at(y, x, 0) = px[2] * scale;
        out.at(y, x, 1) = px[1] * scale;
        out.at(y, x, 2) = px[0] * scale;
      }
    }
  }
  return out;
}

Image load_image_resized(const std::string& path, int size) {
  Image img = load_image(path);
  if (img.height == size && img.width == size) return img;
  cv::Mat m(img.height, img.width, CV_64FC3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      m.at<cv::Vec3d>(y, x) = {img.at(y, x, 0), img.at(y, x, 1),
                               img.at(y, x, 2)};
    }
  }
  cv::Mat r;
  cv::resize(m, r, cv::Size(size, size), 0, 0, cv::INTER_LINEAR);
  Image out(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const auto& px = r.at<cv::Vec3d>(y, x);
      out.at(y, x, 0) = px[0];
      out.at(y, x, 1) = px[1];
      out.at(y, x, 2) = px[2];
    }
  }
  return out;
}

void save_image_png(const Image& img, const std::string& path) {
  cv::Mat m(img.height, img.width, CV_8UC3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      auto to8 = [&](int c) {
        double v = std::min(1.0, std::max(0.0, img.at(y, x, c)));
        return static_cast<uchar>(std::lround(v * 255.0));
      };
      m.at<cv::Vec3b>(y, x) = {to8(2), to8(1), to8(0)};  // BGR
    }
  }
  if (!cv::imwrite(path, m)) {
    throw Error("cannot write image '" + path + "'");
  }
}

void save_gray16_png(const std::vector<uint16_t>& values, int height,
                     int width, const std::string& path) {
  if (values.size() != static_cast<size_t>(height) * width) {
    throw Error("save_gray16_png: value count does not match dimensions");
  }
  cv::Mat m(height, width, CV_16UC1);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      m.at<uint16_t>(y, x) = values[static_cast<size_t>(y) * width + x];
    }
  }
  if (!cv::imwrite(path, m)) {
    throw Error("cannot write image '" + path + "'");
  }
}

void save_mask_png(const std::vector<uint8_t>& mask, int height, int width,
                   const std::string& path) {
  if (mask.size() != static_cast<size_t>(height) * width) {
    throw Error("save_mask_png: value count does not match dimensions");
  }
  cv::Mat m(height, width, CV_8UC1);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      m.at<uchar>(y, x) = mask[static_cast<size_t>(y) * width + x] ? 255 : 0;
    }
  }
  if (!cv::imwrite(path, m)) {
    throw Error("cannot write image '" + path + "'");
  }
}

void save_pbm(const std::vector<uint8_t>& bits, int height, int width,
              const std::string& path) {
  if (bits.size() != static_cast<size_t>(height) * width) {
    throw Error("save_pbm: value count does not match dimensions");
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write '" + path + "'");
  f << "P4\n" << width << " " << height << "\n";
  const int row_bytes = (width + 7) / 8;
  std::vector<uint8_t> row(row_bytes);
  for (int y = 0; y < height; ++y) {
    std::fill(row.begin(), row.end(), 0);
    for (int x = 0; x < width; ++x) {
      if (bits[static_cast<size_t>(y) * width + x]) {
        row[x / 8] |= static_cast<uint8_t>(0x80 >> (x % 8));
      }
    }
    f.write(reinterpret_cast<const char*>(row.data()), row_bytes);
  }
  if (!f) throw Error("failed writing '" + path + "'");
}

}  // namespace gmae
