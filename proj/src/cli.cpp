// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "gmae/checkpoint.hpp"
#include "gmae/config_file.hpp"
#include "gmae/fit.hpp"
#include "gmae/image_io.hpp"
#include "gmae/metrics.hpp"
#include "gmae/plots.hpp"
#include "gmae/renderer.hpp"
#include "gmae/rng.hpp"
#include "gmae/shapes.hpp"
#include "gmae/trainer.hpp"
#include "gmae/zeroshot.hpp"

namespace fs = std::filesystem;

namespace gmae {

namespace {

// ------------------------------------------------------------- shared bits

std::string default_run_name(uint64_t seed) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm_utc);
  return std::string(buf) + "-seed" + std::to_string(seed);
}

std::string stem_of(const std::string& path) {
  return fs::path(path).stem().string();
}

// Common flags shared by every subcommand that reads a Gaussian scene,
// either predicted from a checkpoint or loaded from a fitted JSON file.
struct InferArgs {
  std::string ckpt;
  std::string raw;
  std::string image;
  std::string out = "runs";
  std::string config;
};

void add_infer_flags(CLI::App* cmd, InferArgs& a, bool allow_raw = false) {
  auto* ckpt = cmd->add_option("--ckpt", a.ckpt, "checkpoint file");
  if (allow_raw) {
    auto* raw = cmd->add_option("--raw", a.raw, "fitted gaussian JSON file");
    ckpt->excludes(raw);
    raw->excludes(ckpt);
  } else {
    ckpt->required();
  }
  cmd->add_option("--image", a.image, "input image")->required();
  cmd->add_option("--out", a.out, "output directory");
  cmd->add_option("--config", a.config, "key=value config file");
}

struct LoadedModel {
  RunConfig cfg;
  GmaeModel model;
};

LoadedModel load_model(const InferArgs& a) {
  RunConfig cfg =
      a.config.empty() ? preset_config("desk") : parse_config_file(a.config);
  Checkpoint ckpt = load_checkpoint(a.ckpt);
  cfg.model = ckpt.model_config;
  cfg.sync();
  cfg.model.validate();
  cfg.camera.validate();
  LoadedModel lm{cfg, GmaeModel(ckpt.model_config)};
  apply_checkpoint(ckpt, lm.model, nullptr);
  return lm;
}

Image side_by_side(const Image& a, const Image& b) {
  Image out(a.height, a.width * 2 + 2, 1.0);
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        out.at(y, x, c) = a.at(y, x, c);
        out.at(y, a.width + 2 + x, c) = b.at(y, x, c);
      }
    }
  }
  return out;
}

std::vector<uint8_t> load_binary_mask(const std::string& path, int h, int w) {
  Image m = load_image_resized(path, h);
  if (m.height != h || m.width != w) {
    throw Error("mask '" + path + "' does not match the image size");
  }
  std::vector<uint8_t> out(static_cast<size_t>(h) * w, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double g = (m.at(y, x, 0) + m.at(y, x, 1) + m.at(y, x, 2)) / 3.0;
      out[static_cast<size_t>(y) * w + x] = g > 0.5 ? 1 : 0;
    }
  }
  return out;
}

std::vector<Image> load_corpus_dir(const std::string& dir, int size) {
  std::vector<std::string> files;
  if (!fs::is_directory(dir)) {
    throw FileError("data directory '" + dir + "' does not exist");
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw FileError("no images found in '" + dir + "'");
  }
  std::vector<Image> corpus;
  corpus.reserve(files.size());
  for (const auto& f : files) corpus.push_back(load_image_resized(f, size));
  return corpus;
}

// ----------------------------------------------------------- subcommands

int cmd_train(const std::string& preset, const std::string& config_path,
              const std::string& data_dir, int shapes, int holdout,
              const std::string& out_dir, std::string run_name,
              const std::vector<std::pair<std::string, std::string>>& sets) {
  RunConfig cfg = config_path.empty() ? preset_config(preset)
                                      : parse_config_file(config_path);
  for (const auto& [k, v] : sets) apply_config_entry(cfg, k, v);
  cfg.sync();
  cfg.validate();

  std::vector<Image> corpus;
  if (!data_dir.empty()) {
    corpus = load_corpus_dir(data_dir, cfg.model.image_size);
  } else if (shapes > 0) {
    for (auto& s :
         make_shape_corpus(cfg.train.seed, shapes, cfg.model.image_size)) {
      corpus.push_back(std::move(s.image));
    }
  } else {
    throw Error("train: provide --data or --shapes");
  }
  if (holdout < 0 || holdout >= static_cast<int>(corpus.size())) {
    throw Error("train: holdout must leave a non-empty training set");
  }
  corpus.resize(corpus.size() - holdout);

  if (run_name.empty()) run_name = default_run_name(cfg.train.seed);
  const fs::path run_dir = fs::path(out_dir) / run_name;
  fs::create_directories(run_dir);
  {
    std::ofstream echo(run_dir / "config.cfg");
    echo << dump_config(cfg);
  }

  GmaeModel model(cfg.model, cfg.train.seed);
  Trainer trainer(model, cfg.train, cfg.camera);

  std::ofstream csv(run_dir / "loss.csv", std::ios::trunc);
  if (!csv) throw Error("cannot write loss.csv");
  csv << "step,epoch,lr,loss\n";
  const auto log_step = [&](long step, int epoch, double lr, double loss) {
    char line[128];
    std::snprintf(line, sizeof(line), "%ld,%d,%.17g,%.17g\n", step, epoch, lr,
                  loss);
    csv << line;
  };
  if (cfg.train.epochs > 0) {
    trainer.run(corpus, log_step);
  }
  csv.flush();
  save_checkpoint((run_dir / "checkpoint.bin").string(), model,
                  &trainer.optimizer(), trainer.global_step(), &cfg.train);
  std::cout << "run dir: " << run_dir.string() << "\n"
            << "steps: " << trainer.global_step() << "\n";
  return 0;
}

int cmd_reconstruct(const InferArgs& a, double mask_ratio, uint64_t seed) {
  LoadedModel lm = load_model(a);
  Image input = load_image_resized(a.image, lm.cfg.model.image_size);
  Image recon =
      reconstruct_image(lm.model, input, mask_ratio, seed, lm.cfg.camera);
  fs::create_directories(a.out);
  const std::string stem = stem_of(a.image);
  save_image_png(recon, (fs::path(a.out) / ("recon_" + stem + ".png")).string());
  save_image_png(side_by_side(input, recon),
                 (fs::path(a.out) / ("side_" + stem + ".png")).string());
  MetricsReport report;
  report.entries.push_back({stem, mse(input, recon), psnr(input, recon),
                            std::nullopt, std::nullopt});
  report.write((fs::path(a.out) / "metrics.json").string());
  std::cout << "psnr: " << psnr(input, recon) << "\n";
  return 0;
}

int cmd_fit(const std::string& image_path, const std::string& out_dir,
            const FitConfig& fc, int size) {
  CameraConfig cam;
  cam.height = cam.width = size;
  cam.validate();
  Image target = load_image_resized(image_path, size);
  fs::create_directories(out_dir);
  const std::string stem = stem_of(image_path);

  std::ofstream csv(fs::path(out_dir) / ("fit_" + stem + "_loss.csv"),
                    std::ios::trunc);
  if (!csv) throw Error("cannot write the fit loss csv");
  csv << "step,lr,loss\n";
  FitResult fr =
      fit_image(target, fc, cam, [&](long step, double lr, double loss) {
        char line[96];
        std::snprintf(line, sizeof(line), "%ld,%.17g,%.17g\n", step, lr,
                      loss);
        csv << line;
      });
  csv.flush();

  save_raw_json({fr.raw, fc.scale_clamp, size},
                (fs::path(out_dir) / ("fit_" + stem + ".json")).string());
  Image recon =
      render_gaussians(fr.raw, ScaleClamp{fc.scale_clamp}, cam).out.image;
  save_image_png(recon,
                 (fs::path(out_dir) / ("recon_" + stem + ".png")).string());
  save_image_png(side_by_side(target, recon),
                 (fs::path(out_dir) / ("side_" + stem + ".png")).string());
  MetricsReport report;
  report.entries.push_back({stem, mse(target, recon), psnr(target, recon),
                            std::nullopt, std::nullopt});
  report.write((fs::path(out_dir) / "metrics.json").string());
  std::cout << "psnr: " << psnr(target, recon) << "\n";
  return 0;
}

// A Gaussian set plus the camera and clamp it renders under, from either a
// checkpoint (model prediction on the image) or a fitted JSON file.
struct SceneSource {
  RunConfig cfg;
  ScaleClamp clamp;
  Image input;
  Mat raw;
};

SceneSource load_scene(const InferArgs& a) {
  if (a.ckpt.empty() == a.raw.empty()) {
    throw Error("provide exactly one of --ckpt or --raw");
  }
  if (!a.ckpt.empty()) {
    LoadedModel lm = load_model(a);
    Image input = load_image_resized(a.image, lm.cfg.model.image_size);
    Mat raw = predict_raw(lm.model, input,
                          MaskSpec::full(lm.cfg.model.tokens()));
    return {lm.cfg, ScaleClamp{lm.cfg.model.scale_clamp}, std::move(input),
            std::move(raw)};
  }
  RawFile rf = load_raw_json(a.raw);
  RunConfig cfg =
      a.config.empty() ? preset_config("desk") : parse_config_file(a.config);
  cfg.camera.height = cfg.camera.width = rf.image_size;
  cfg.camera.validate();
  Image input = load_image_resized(a.image, rf.image_size);
  return {std::move(cfg), ScaleClamp{rf.scale_clamp}, std::move(input),
          std::move(rf.raw)};
}

LayerStack stack_of(const SceneSource& s, int layers, GroupMode mode,
                    double threshold) {
  return assign_layers(s.raw, s.clamp, s.cfg.camera, layers, mode, threshold);
}

int cmd_layers(const InferArgs& a, int layers, const std::string& mode_name,
               double threshold, bool dump_cumulative) {
  SceneSource s = load_scene(a);
  const Image& input = s.input;
  LayerStack stack =
      stack_of(s, layers, group_mode_from_string(mode_name), threshold);
  fs::create_directories(a.out);
  const std::string stem = stem_of(a.image);
  // Stored value is layer + 1 so 0 always means "no layer".
  std::vector<uint16_t> map16(static_cast<size_t>(input.height) *
                              input.width);
  for (int y = 0; y < input.height; ++y) {
    for (int x = 0; x < input.width; ++x) {
      map16[static_cast<size_t>(y) * input.width + x] =
          static_cast<uint16_t>(stack.layer_index(y, x) + 1);
    }
  }
  save_gray16_png(map16, input.height, input.width,
                  (fs::path(a.out) / ("layers_" + stem + "_map.png")).string());
  if (dump_cumulative) {
    for (size_t i = 0; i < stack.cumulative.size(); ++i) {
      save_image_png(stack.cumulative[i],
                     (fs::path(a.out) /
                      ("layers_" + stem + "_cum" + std::to_string(i) + ".png"))
                         .string());
    }
  }
  std::cout << "layers: " << layers << "\n";
  return 0;
}

int cmd_edges(const InferArgs& a, int layers, const std::string& mode_name,
              double threshold, const std::string& gt_path) {
  SceneSource s = load_scene(a);
  LayerStack stack =
      stack_of(s, layers, group_mode_from_string(mode_name), threshold);
  EdgeMap edges = edge_detect(stack);
  fs::create_directories(a.out);
  const std::string stem = stem_of(a.image);
  save_pbm(edges.edges, edges.height, edges.width,
           (fs::path(a.out) / ("edges_" + stem + ".pbm")).string());
  if (!gt_path.empty()) {
    auto gt = load_binary_mask(gt_path, edges.height, edges.width);
    MetricsReport report;
    MetricsReport::Entry e{stem, 0.0, 0.0, std::nullopt,
                           boundary_f1(edges.edges, gt, edges.height,
                                       edges.width)};
    report.entries.push_back(e);
    report.write((fs::path(a.out) / "metrics.json").string());
  }
  return 0;
}

int cmd_segment(const InferArgs& a, int layers, const std::string& mode_name,
                double threshold, int split, const std::string& gt_path) {
  SceneSource s = load_scene(a);
  LayerStack stack =
      stack_of(s, layers, group_mode_from_string(mode_name), threshold);
  SegmentationMask m = figure_ground(stack, split);
  fs::create_directories(a.out);
  const std::string stem = stem_of(a.image);
  save_mask_png(m.mask, m.height, m.width,
                (fs::path(a.out) /
                 ("segment_" + stem + "_t" + std::to_string(split) + ".png"))
                    .string());
  if (!gt_path.empty()) {
    auto gt = load_binary_mask(gt_path, m.height, m.width);
    MetricsReport report;
    MetricsReport::Entry e{stem, 0.0, 0.0, iou(m.mask, gt), std::nullopt};
    report.entries.push_back(e);
    report.write((fs::path(a.out) / "metrics.json").string());
    std::cout << "iou: " << *e.iou << "\n";
  }
  return 0;
}

int cmd_prefix_render(const InferArgs& a, const std::string& counts_csv) {
  SceneSource s = load_scene(a);
  const Image& input = s.input;
  std::vector<int> counts;
  std::stringstream ss(counts_csv);
  std::string part;
  while (std::getline(ss, part, ',')) {
    counts.push_back(std::stoi(part));
  }
  if (counts.empty()) throw Error("prefix-render: empty count list");
  const int k = static_cast<int>(s.raw.rows());
  Image strip(input.height,
              static_cast<int>(counts.size()) * (input.width + 2) - 2, 1.0);
  for (size_t i = 0; i < counts.size(); ++i) {
    const int prefix = std::min(counts[i], k);
    Image img = cumulative_render(s.raw, s.clamp, s.cfg.camera, prefix);
    const int x0 = static_cast<int>(i) * (input.width + 2);
    for (int y = 0; y < input.height; ++y) {
      for (int x = 0; x < input.width; ++x) {
        for (int c = 0; c < 3; ++c) {
          strip.at(y, x0 + x, c) = img.at(y, x, c);
        }
      }
    }
  }
  fs::create_directories(a.out);
  save_image_png(strip, (fs::path(a.out) /
                         ("prefix_" + stem_of(a.image) + ".png"))
                            .string());
  return 0;
}

int cmd_config(const std::string& preset, const std::string& out_path) {
  const std::string text = dump_config(preset_config(preset));
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out_path, std::ios::trunc);
    if (!f) throw Error("cannot write '" + out_path + "'");
    f << text;
  }
  return 0;
}

int cmd_diag(const InferArgs& a) {
  SceneSource s = load_scene(a);
  GaussianSet g = activate_parameters(s.raw, s.clamp);
  ScreenGaussianSet sg = project(g, s.cfg.camera);
  std::vector<ScatterPoint> size_depth, centers;
  for (int i = 0; i < g.count(); ++i) {
    const double mean_scale = g.scales.row(i).mean();
    size_depth.push_back({sg.depths(i), mean_scale, 0.0});
    centers.push_back(
        {g.centers(i, 0), g.centers(i, 1), 1.0 - g.opacities(i)});
  }
  fs::create_directories(a.out);
  ScatterSpec sd{"size vs depth", s.cfg.camera.z_near, s.cfg.camera.z_far,
                 0.0, s.clamp.c, 256};
  save_image_png(scatter_plot(size_depth, sd),
                 (fs::path(a.out) / "diag_size_vs_depth.png").string());
  ScatterSpec cs{"centers", -1.0, 1.0, -1.0, 1.0, 256};
  save_image_png(scatter_plot(centers, cs),
                 (fs::path(a.out) / "diag_centers.png").string());
  return 0;
}

// Finite-difference check of the full raw-parameter gradient on a random
// scene.  The camera uses a wide support cutoff so the truncation boundary
// contributes only ~exp(-32) and central differences see a smooth function;
// depths are spread out and opacities bounded away from the alpha clamp.
int cmd_gradcheck(uint64_t seed) {
  const int k = 6;
  CameraConfig cam;
  cam.height = cam.width = 32;
  cam.cutoff = 8.0;
  const ScaleClamp clamp;

  Rng rng = Rng::stream(seed, 0xf00d);
  Mat raw(k, kGaussianDim);
  for (int i = 0; i < k; ++i) {
    raw(i, 0) = rng.uniform(-0.7, 0.7);
    raw(i, 1) = rng.uniform(-0.7, 0.7);
    raw(i, 2) = -0.6 + 1.2 * i / (k - 1);  // well separated depths
    for (int j = 3; j < 6; ++j) raw(i, j) = rng.uniform(-1.73, -0.8);
    for (int j = 6; j < 10; ++j) raw(i, j) = rng.uniform(-1.0, 1.0);
    for (int j = 10; j < 13; ++j) raw(i, j) = rng.uniform(-1.0, 1.0);
    raw(i, 13) = rng.uniform(-1.0, 0.5);
  }

  // Loss = sum of fixed random weights times pixels.
  Rng wrng = Rng::stream(seed, 0x77656967);
  Image weights(cam.height, cam.width, 0.0);
  for (double& v : weights.data) v = wrng.uniform(-1.0, 1.0);
  const auto loss_of = [&](const Mat& params) {
    RenderResult r = render_gaussians(params, clamp, cam);
    double acc = 0.0;
    for (size_t i = 0; i < weights.data.size(); ++i) {
      acc += weights.data[i] * r.out.image.data[i];
    }
    return acc;
  };

  RenderResult base = render_gaussians(raw, clamp, cam);
  Mat analytic = render_backward(raw, base.gaussians, base.screen, cam, clamp,
                                 weights);

  const double h = 1e-4;
  struct Group {
    const char* name;
    int lo, hi;
  };
  const Group groups[] = {{"position", 0, 3},
                          {"scale", 3, 6},
                          {"quaternion", 6, 10},
                          {"color", 10, 13},
                          {"opacity", 13, 14}};
  bool all_ok = true;
  std::printf("%-12s %14s %14s  status\n", "group", "max_abs_diff",
              "max_rel_err");
  for (const Group& grp : groups) {
    double max_abs = 0.0, max_rel = 0.0;
    bool ok = true;
    for (int i = 0; i < k; ++i) {
      for (int j = grp.lo; j < grp.hi; ++j) {
        Mat p = raw;
        p(i, j) = raw(i, j) + h;
        const double lp = loss_of(p);
        p(i, j) = raw(i, j) - h;
        const double lm = loss_of(p);
        const double fd = (lp - lm) / (2.0 * h);
        const double a = analytic(i, j);
        const double diff = std::abs(a - fd);
        const double scale = std::max(std::abs(a), std::abs(fd));
        max_abs = std::max(max_abs, diff);
        if (scale > 0) max_rel = std::max(max_rel, diff / scale);
        if (diff > 1e-4 * scale + 1e-7) ok = false;
      }
    }
    std::printf("%-12s %14.3e %14.3e  %s\n", grp.name, max_abs, max_rel,
                ok ? "ok" : "FAIL");
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Gaussian masked autoencoder toolkit"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "train a model");
  std::string preset = "desk", config_path, data_dir, out_dir = "runs";
  std::string run_name;
  int shapes = 0, holdout = 0;
  std::vector<std::string> overrides;
  train->add_option("--preset", preset, "desk | smoke | overfit");
  train->add_option("--config", config_path, "key=value config file");
  train->add_option("--data", data_dir, "directory of training images");
  train->add_option("--shapes", shapes, "use a procedural shape corpus");
  train->add_option("--holdout", holdout, "trailing samples to exclude");
  train->add_option("--out", out_dir, "output root directory");
  train->add_option("--run-name", run_name, "run directory name");
  train->add_option("--set", overrides,
                    "config override key=value (repeatable)");
  // Frequently used shorthands.
  std::string o_epochs, o_batch, o_lr, o_ratio, o_loss, o_aug, o_queries,
      o_seed;
  train->add_option("--epochs", o_epochs, "override train.epochs");
  train->add_option("--batch-size", o_batch, "override train.batch_size");
  train->add_option("--lr", o_lr, "override train.base_lr");
  train->add_option("--mask-ratio", o_ratio, "override train.mask_ratio");
  train->add_option("--loss-mode", o_loss, "override train.loss_mode");
  train->add_option("--augment", o_aug, "override train.augment");
  train->add_option("--queries", o_queries, "override model.queries");
  train->add_option("--seed", o_seed, "override train.seed");

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "render a reconstruction");
  InferArgs rec_args;
  double rec_ratio = 0.0;
  uint64_t rec_seed = 0;
  add_infer_flags(rec, rec_args);
  rec->add_option("--mask-ratio", rec_ratio, "mask ratio (0 = none)");
  rec->add_option("--seed", rec_seed, "mask sampling seed");

  // fit
  auto* fit = app.add_subcommand("fit",
                                 "fit gaussians directly to one image");
  std::string fit_image_path, fit_out = "runs";
  FitConfig fit_cfg;
  int fit_size = 64;
  fit->add_option("--image", fit_image_path, "target image")->required();
  fit->add_option("--out", fit_out, "output directory");
  fit->add_option("--gaussians", fit_cfg.gaussians, "number of gaussians");
  fit->add_option("--steps", fit_cfg.steps, "optimizer steps");
  fit->add_option("--lr", fit_cfg.base_lr, "base learning rate");
  fit->add_option("--warmup", fit_cfg.warmup_steps, "warmup steps");
  fit->add_option("--seed", fit_cfg.seed, "init seed");
  fit->add_option("--size", fit_size, "render size in pixels");
  fit->add_option("--scale-clamp", fit_cfg.scale_clamp,
                  "upper bound on gaussian scales");

  // layers
  auto* lay = app.add_subcommand("layers", "depth layer decomposition");
  InferArgs lay_args;
  int lay_d = 16, seg_split = 1;
  double lay_th = 0.05;
  std::string lay_mode = "equal_count";
  bool lay_cum = false;
  add_infer_flags(lay, lay_args, true);
  lay->add_option("--layers", lay_d, "number of depth layers");
  lay->add_option("--group-mode", lay_mode,
                  "equal_count | equal_depth_width");
  lay->add_option("--threshold", lay_th, "layer assignment threshold");
  lay->add_flag("--cumulative", lay_cum, "also write cumulative renders");

  // edges
  auto* edg = app.add_subcommand("edges", "zero-shot edge map");
  InferArgs edg_args;
  int edg_d = 16;
  double edg_th = 0.05;
  std::string edg_mode = "equal_depth_width", edg_gt;
  add_infer_flags(edg, edg_args, true);
  edg->add_option("--layers", edg_d, "number of depth layers");
  edg->add_option("--group-mode", edg_mode,
                  "equal_count | equal_depth_width");
  edg->add_option("--threshold", edg_th, "layer assignment threshold");
  edg->add_option("--gt", edg_gt, "ground-truth edge mask for boundary F1");

  // segment
  auto* seg = app.add_subcommand("segment", "figure-ground segmentation");
  InferArgs seg_args;
  int seg_d = 16;
  double seg_th = 0.05;
  std::string seg_mode = "equal_count", seg_gt;
  add_infer_flags(seg, seg_args, true);
  seg->add_option("--layers", seg_d, "number of depth layers");
  seg->add_option("--group-mode", seg_mode,
                  "equal_count | equal_depth_width");
  seg->add_option("--threshold", seg_th, "layer assignment threshold");
  seg->add_option("--split", seg_split, "figure = layers >= split");
  seg->add_option("--gt", seg_gt, "ground-truth mask for IoU");

  // prefix-render
  auto* pre = app.add_subcommand("prefix-render",
                                 "renders of leading depth prefixes");
  InferArgs pre_args;
  std::string pre_counts = "32,64,128,256,512";
  add_infer_flags(pre, pre_args, true);
  pre->add_option("--counts", pre_counts, "comma-separated prefix sizes");

  // config
  auto* cfgcmd = app.add_subcommand("config", "print a preset config file");
  std::string cfg_preset = "desk", cfg_out;
  cfgcmd->add_option("--preset", cfg_preset, "desk | smoke | overfit");
  cfgcmd->add_option("--out", cfg_out, "write to a file instead of stdout");

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck",
                                "finite-difference gradient check");
  uint64_t gc_seed = 1;
  gc->add_option("--seed", gc_seed, "scene seed");

  // diag
  auto* dia = app.add_subcommand("diag", "diagnostic scatter plots");
  InferArgs dia_args;
  add_infer_flags(dia, dia_args, true);

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help();
      return 0;
    }
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (*train) {
      std::vector<std::pair<std::string, std::string>> sets;
      for (const auto& kv : overrides) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos) {
          std::cerr << "--set expects key=value, got '" << kv << "'\n";
          return 2;
        }
        sets.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
      }
      if (!o_epochs.empty()) sets.emplace_back("train.epochs", o_epochs);
      if (!o_batch.empty()) sets.emplace_back("train.batch_size", o_batch);
      if (!o_lr.empty()) sets.emplace_back("train.base_lr", o_lr);
      if (!o_ratio.empty()) sets.emplace_back("train.mask_ratio", o_ratio);
      if (!o_loss.empty()) sets.emplace_back("train.loss_mode", o_loss);
      if (!o_aug.empty()) sets.emplace_back("train.augment", o_aug);
      if (!o_queries.empty()) sets.emplace_back("model.queries", o_queries);
      if (!o_seed.empty()) sets.emplace_back("train.seed", o_seed);
      return cmd_train(preset, config_path, data_dir, shapes, holdout,
                       out_dir, run_name, sets);
    }
    if (*rec) return cmd_reconstruct(rec_args, rec_ratio, rec_seed);
    if (*fit) return cmd_fit(fit_image_path, fit_out, fit_cfg, fit_size);
    if (*lay) return cmd_layers(lay_args, lay_d, lay_mode, lay_th, lay_cum);
    if (*edg) return cmd_edges(edg_args, edg_d, edg_mode, edg_th, edg_gt);
    if (*seg) {
      return cmd_segment(seg_args, seg_d, seg_mode, seg_th, seg_split,
                         seg_gt);
    }
    if (*pre) return cmd_prefix_render(pre_args, pre_counts);
    if (*cfgcmd) return cmd_config(cfg_preset, cfg_out);
    if (*gc) return cmd_gradcheck(gc_seed);
    if (*dia) return cmd_diag(dia_args);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const CheckpointError& e) {
    std::cerr << e.what() << "\n";
    return 4;
  } catch (const FileError& e) {
    std::cerr << e.what() << "\n";
    return 4;
  } catch (const TrainError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace gmae
