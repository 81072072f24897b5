// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gmae/checkpoint.hpp"
#include "gmae/config_file.hpp"
#include "gmae/loss.hpp"
#include "gmae/metrics.hpp"
#include "gmae/patches.hpp"
#include "gmae/renderer.hpp"
#include "gmae/schedule.hpp"
#include "gmae/shapes.hpp"
#include "gmae/trainer.hpp"
#include "gmae/zeroshot.hpp"

namespace py = pybind11;
using namespace gmae;

namespace {

using DoubleArray =
    py::array_t<double, py::array::c_style | py::array::forcecast>;

Image image_from_array(const DoubleArray& arr) {
  if (arr.ndim() != 3 || arr.shape(2) != 3) {
    throw Error("expected an (H, W, 3) array");
  }
  Image img(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
  std::copy(arr.data(), arr.data() + arr.size(), img.data.begin());
  return img;
}

py::array_t<double> array_from_image(const Image& img) {
  py::array_t<double> arr({img.height, img.width, 3});
  std::copy(img.data.begin(), img.data.end(), arr.mutable_data());
  return arr;
}

py::array_t<bool> array_from_bits(const std::vector<uint8_t>& bits, int h,
                                  int w) {
  py::array_t<bool> arr({h, w});
  bool* out = arr.mutable_data();
  for (size_t i = 0; i < bits.size(); ++i) out[i] = bits[i] != 0;
  return arr;
}

CameraConfig make_camera(int size, std::array<double, 3> background,
                         double lowpass, double cutoff) {
  CameraConfig cam;
  cam.height = cam.width = size;
  cam.background = Eigen::Vector3d(background[0], background[1],
                                   background[2]);
  cam.lowpass = lowpass;
  cam.cutoff = cutoff;
  cam.validate();
  return cam;
}

LossMode loss_mode_of(const std::string& name) {
  return loss_mode_from_string(name);
}

// Model plus the camera derived from its configuration.
struct PyModel {
  ModelConfig cfg;
  CameraConfig cam;
  GmaeModel model;
  long global_step = 0;

  PyModel(const ModelConfig& c, uint64_t seed) : cfg(c), model(c, seed) {
    cam.height = cam.width = c.image_size;
  }

  static PyModel load(const std::string& path) {
    Checkpoint ckpt = load_checkpoint(path);
    PyModel pm(ckpt.model_config, 0);
    apply_checkpoint(ckpt, pm.model, nullptr);
    pm.global_step = ckpt.global_step;
    return pm;
  }

  void save(const std::string& path) const {
    save_checkpoint(path, model, nullptr, global_step, nullptr);
  }

  Image check_input(const DoubleArray& arr) const {
    Image img = image_from_array(arr);
    if (img.height != cfg.image_size || img.width != cfg.image_size) {
      throw Error("input image must be " + std::to_string(cfg.image_size) +
                  "x" + std::to_string(cfg.image_size));
    }
    return img;
  }

  Mat gaussians(const DoubleArray& arr) const {
    return predict_raw(model, check_input(arr), MaskSpec::full(cfg.tokens()));
  }

  py::array_t<double> reconstruct(const DoubleArray& arr, double mask_ratio,
                                  uint64_t seed) const {
    return array_from_image(
        reconstruct_image(model, check_input(arr), mask_ratio, seed, cam));
  }

  LayerStack stack(const DoubleArray& arr, int layers, double threshold,
                   const std::string& mode) const {
    return assign_layers(gaussians(arr), ScaleClamp{cfg.scale_clamp}, cam,
                         layers, group_mode_from_string(mode), threshold);
  }

  py::dict layers(const DoubleArray& arr, int layers, double threshold,
                  const std::string& mode) const {
    LayerStack s = stack(arr, layers, threshold, mode);
    EdgeMap e = edge_detect(s);
    py::dict out;
    out["boundaries"] = s.boundaries;
    out["layer_index"] = Eigen::MatrixXi(s.layer_index);
    out["edges"] = array_from_bits(e.edges, e.height, e.width);
    py::list cumulative;
    for (const Image& img : s.cumulative) {
      cumulative.append(array_from_image(img));
    }
    out["cumulative"] = cumulative;
    return out;
  }

  py::array_t<bool> figure_mask(const DoubleArray& arr, int split, int layers,
                                double threshold,
                                const std::string& mode) const {
    SegmentationMask m = figure_ground(stack(arr, layers, threshold, mode),
                                       split);
    return array_from_bits(m.mask, m.height, m.width);
  }

  py::dict config() const {
    py::dict d;
    d["image_size"] = cfg.image_size;
    d["patch_size"] = cfg.patch_size;
    d["enc_dim"] = cfg.enc_dim;
    d["enc_depth"] = cfg.enc_depth;
    d["enc_heads"] = cfg.enc_heads;
    d["dec_dim"] = cfg.dec_dim;
    d["dec_depth"] = cfg.dec_depth;
    d["dec_heads"] = cfg.dec_heads;
    d["queries"] = cfg.queries;
    d["scale_clamp"] = cfg.scale_clamp;
    return d;
  }
};

ModelConfig config_from_kwargs(int image_size, int patch_size, int enc_dim,
                               int enc_depth, int enc_heads, int dec_dim,
                               int dec_depth, int dec_heads, int queries,
                               double scale_clamp) {
  ModelConfig c;
  c.image_size = image_size;
  c.patch_size = patch_size;
  c.enc_dim = enc_dim;
  c.enc_depth = enc_depth;
  c.enc_heads = enc_heads;
  c.dec_dim = dec_dim;
  c.dec_depth = dec_depth;
  c.dec_heads = dec_heads;
  c.queries = queries;
  c.scale_clamp = scale_clamp;
  return c;
}

}  // namespace

PYBIND11_MODULE(_gmae, m) {
  m.doc() = "Gaussian masked autoencoder: differentiable splatting renderer, "
            "masked ViT autoencoder, and zero-shot depth layering";

  py::register_exception<Error>(m, "GmaeError", PyExc_RuntimeError);

  // ----------------------------------------------------------- rendering
  m.def(
      "render",
      [](const Mat& raw, int size, std::array<double, 3> background,
         double scale_clamp, double cutoff, double lowpass, int prefix) {
        CameraConfig cam = make_camera(size, background, lowpass, cutoff);
        return array_from_image(
            render_gaussians(raw, ScaleClamp{scale_clamp}, cam, prefix)
                .out.image);
      },
      py::arg("raw"), py::arg("size") = 64,
      py::arg("background") = std::array<double, 3>{0.0, 0.0, 0.0},
      py::arg("scale_clamp") = 1.0, py::arg("cutoff") = 3.0,
      py::arg("lowpass") = 0.3, py::arg("prefix") = -1,
      "Splat raw (K, 14) Gaussian parameters into an (size, size, 3) image.");

  m.def(
      "render_gradient",
      [](const Mat& raw, const DoubleArray& grad_image, int size,
         std::array<double, 3> background, double scale_clamp, double cutoff,
         double lowpass) {
        CameraConfig cam = make_camera(size, background, lowpass, cutoff);
        const ScaleClamp clamp{scale_clamp};
        GaussianSet g = activate_parameters(raw, clamp);
        ScreenGaussianSet sg = project(g, cam);
        return render_backward(raw, g, sg, cam, clamp,
                               image_from_array(grad_image));
      },
      py::arg("raw"), py::arg("grad_image"), py::arg("size") = 64,
      py::arg("background") = std::array<double, 3>{0.0, 0.0, 0.0},
      py::arg("scale_clamp") = 1.0, py::arg("cutoff") = 3.0,
      py::arg("lowpass") = 0.3,
      "Analytic d(loss)/d(raw) given d(loss)/d(image).");

  m.def(
      "activate",
      [](const Mat& raw, double scale_clamp) {
        GaussianSet g = activate_parameters(raw, ScaleClamp{scale_clamp});
        py::dict d;
        d["centers"] = Mat(g.centers);
        d["scales"] = Mat(g.scales);
        d["quaternions"] = Mat(g.quaternions);
        d["colors"] = Mat(g.colors);
        d["opacities"] = Vec(g.opacities);
        return d;
      },
      py::arg("raw"), py::arg("scale_clamp") = 1.0,
      "Map raw parameters to world-space Gaussians (tanh/sigmoid/unit-quat).");

  // ----------------------------------------------------------- utilities
  m.def(
      "sample_mask",
      [](int total, double ratio, uint64_t seed) {
        Rng rng(seed);
        MaskSpec mask = sample_mask(total, ratio, rng);
        return std::make_pair(mask.visible, mask.masked);
      },
      py::arg("total"), py::arg("ratio"), py::arg("seed") = 0,
      "Seeded visible/masked token split at the given mask ratio.");

  m.def(
      "patchify",
      [](const DoubleArray& arr, int patch) {
        Image img = image_from_array(arr);
        return patchify(img, PatchGrid{img.height, img.width, patch});
      },
      py::arg("image"), py::arg("patch") = 8,
      "Flatten an image into (tokens, patch*patch*3) rows.");

  m.def(
      "unpatchify",
      [](const Mat& tokens, int height, int width, int patch) {
        return array_from_image(
            unpatchify(tokens, PatchGrid{height, width, patch}));
      },
      py::arg("tokens"), py::arg("height"), py::arg("width"),
      py::arg("patch") = 8, "Exact inverse of patchify.");

  m.def(
      "mse",
      [](const DoubleArray& a, const DoubleArray& b) {
        return mse(image_from_array(a), image_from_array(b));
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "psnr",
      [](const DoubleArray& a, const DoubleArray& b) {
        return psnr(image_from_array(a), image_from_array(b));
      },
      py::arg("a"), py::arg("b"),
      "10 * log10(1 / MSE); identical images give +inf.");

  m.def(
      "masked_mse",
      [](const DoubleArray& rendered, const DoubleArray& target,
         const std::vector<int>& visible, int patch, const std::string& mode) {
        Image r = image_from_array(rendered);
        PatchGrid grid{r.height, r.width, patch};
        MaskSpec mask = MaskSpec::from_visible(grid.count(), visible);
        return masked_mse(r, image_from_array(target), mask, grid,
                          loss_mode_of(mode));
      },
      py::arg("rendered"), py::arg("target"), py::arg("visible"),
      py::arg("patch") = 8, py::arg("mode") = "masked",
      "Reconstruction loss over masked patches "
      "('masked' | 'all' | 'masked_normalized').");

  m.def(
      "shape_sample",
      [](uint64_t seed, int size) {
        ShapeSample s = make_shape_sample(seed, size);
        return std::make_pair(array_from_image(s.image),
                              array_from_bits(s.fg_mask, size, size));
      },
      py::arg("seed"), py::arg("size") = 64,
      "Procedural training image and its foreground mask.");

  m.def("lr_schedule", &lr_schedule, py::arg("step"), py::arg("base_lr"),
        py::arg("warmup_steps"), py::arg("total_steps"),
        "Linear warmup then cosine decay to zero.");

  // ----------------------------------------------------------- model
  py::class_<PyModel>(m, "Model",
                      "Masked autoencoder over Gaussian primitives.  Load a "
                      "trained checkpoint or construct a fresh model.")
      .def(py::init([](int image_size, int patch_size, int enc_dim,
                       int enc_depth, int enc_heads, int dec_dim,
                       int dec_depth, int dec_heads, int queries,
                       double scale_clamp, uint64_t seed) {
             return PyModel(
                 config_from_kwargs(image_size, patch_size, enc_dim,
                                    enc_depth, enc_heads, dec_dim, dec_depth,
                                    dec_heads, queries, scale_clamp),
                 seed);
           }),
           py::arg("image_size") = 64, py::arg("patch_size") = 8,
           py::arg("enc_dim") = 192, py::arg("enc_depth") = 6,
           py::arg("enc_heads") = 3, py::arg("dec_dim") = 256,
           py::arg("dec_depth") = 4, py::arg("dec_heads") = 8,
           py::arg("queries") = 512, py::arg("scale_clamp") = 1.0,
           py::arg("seed") = 0)
      .def_static("load", &PyModel::load, py::arg("path"),
                  "Load a checkpoint written by save() or the CLI trainer.")
      .def("save", &PyModel::save, py::arg("path"))
      .def("gaussians", &PyModel::gaussians, py::arg("image"),
           "Predicted raw (queries, 14) Gaussian parameters.")
      .def("reconstruct", &PyModel::reconstruct, py::arg("image"),
           py::arg("mask_ratio") = 0.0, py::arg("seed") = 0,
           "Encode (optionally masked), decode, and splat back to an image.")
      .def("layers", &PyModel::layers, py::arg("image"),
           py::arg("layers") = 16, py::arg("threshold") = 0.05,
           py::arg("mode") = "equal_count",
           "Depth layering: boundaries, per-pixel layer map, edge map, and "
           "cumulative renders.")
      .def("figure_mask", &PyModel::figure_mask, py::arg("image"),
           py::arg("split") = 1, py::arg("layers") = 16,
           py::arg("threshold") = 0.05, py::arg("mode") = "equal_count",
           "Binary figure-ground mask: figure = layer index >= split.")
      .def_property_readonly("config", &PyModel::config)
      .def_readonly("global_step", &PyModel::global_step);
}
