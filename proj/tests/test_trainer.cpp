// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "doctest.h"
#include "gmae/checkpoint.hpp"
#include "gmae/schedule.hpp"
#include "gmae/shapes.hpp"
#include "gmae/trainer.hpp"
#include "helpers.hpp"

using namespace gmae;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.image_size = 16;
  cfg.patch_size = 8;
  cfg.enc_dim = 16;
  cfg.enc_depth = 1;
  cfg.enc_heads = 2;
  cfg.dec_dim = 16;
  cfg.dec_depth = 1;
  cfg.dec_heads = 2;
  cfg.queries = 4;
  return cfg;
}

TrainConfig tiny_train() {
  TrainConfig t;
  t.epochs = 2;
  t.batch_size = 2;
  t.base_lr = 1e-3;
  t.warmup_epochs = 1;
  t.mask_ratio = 0.5;
  t.seed = 5;
  return t;
}

CameraConfig tiny_camera() {
  CameraConfig cam;
  cam.height = cam.width = 16;
  return cam;
}

std::vector<Image> tiny_corpus(int n) {
  std::vector<Image> corpus;
  for (int i = 0; i < n; ++i) {
    corpus.push_back(make_shape_sample(40 + i, 16).image);
  }
  return corpus;
}

std::vector<Mat> snapshot(GmaeModel& model) {
  std::vector<Mat> out;
  for (const auto& p : model.collect_params()) out.push_back(*p.value);
  return out;
}

bool same_params(GmaeModel& model, const std::vector<Mat>& snap) {
  auto params = model.collect_params();
  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i].value->rows() != snap[i].rows() ||
        params[i].value->cols() != snap[i].cols() ||
        !(params[i].value->array() == snap[i].array()).all()) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("masked mse agrees with a brute-force reference") {
  const PatchGrid grid{16, 16, 8};
  MaskSpec mask = MaskSpec::from_visible(4, {0, 3});
  Image rendered = test::random_image(31, 16, 16);
  Image target = test::random_image(32, 16, 16);

  auto patch_origin = [&](int t) {
    return std::pair<int, int>{(t / 2) * 8, (t % 2) * 8};
  };

  SUBCASE("masked mode averages over masked patches only") {
    double sum = 0.0;
    long n = 0;
    for (int t : mask.masked) {
      auto [py, px] = patch_origin(t);
      for (int dy = 0; dy < 8; ++dy) {
        for (int dx = 0; dx < 8; ++dx) {
          for (int c = 0; c < 3; ++c) {
            double d = rendered.at(py + dy, px + dx, c) -
                       target.at(py + dy, px + dx, c);
            sum += d * d;
            ++n;
          }
        }
      }
    }
    double got = masked_mse(rendered, target, mask, grid, LossMode::kMasked);
    CHECK(got == doctest::Approx(sum / n).epsilon(1e-13));
  }

  SUBCASE("all mode is the plain mean over every pixel") {
    double sum = 0.0;
    for (size_t i = 0; i < rendered.data.size(); ++i) {
      double d = rendered.data[i] - target.data[i];
      sum += d * d;
    }
    double got = masked_mse(rendered, target, mask, grid, LossMode::kAll);
    CHECK(got == doctest::Approx(sum / rendered.data.size()).epsilon(1e-13));
  }

  SUBCASE("normalized mode standardizes the target per patch") {
    double sum = 0.0;
    long n = 0;
    for (int t : mask.masked) {
      auto [py, px] = patch_origin(t);
      double m = 0.0, sq = 0.0;
      for (int dy = 0; dy < 8; ++dy) {
        for (int dx = 0; dx < 8; ++dx) {
          for (int c = 0; c < 3; ++c) {
            double v = target.at(py + dy, px + dx, c);
            m += v;
            sq += v * v;
          }
        }
      }
      m /= 192.0;
      double var = sq / 192.0 - m * m;
      double inv = 1.0 / std::sqrt(var + 1e-6);
      for (int dy = 0; dy < 8; ++dy) {
        for (int dx = 0; dx < 8; ++dx) {
          for (int c = 0; c < 3; ++c) {
            double tv = (target.at(py + dy, px + dx, c) - m) * inv;
            double d = rendered.at(py + dy, px + dx, c) - tv;
            sum += d * d;
            ++n;
          }
        }
      }
    }
    double got =
        masked_mse(rendered, target, mask, grid, LossMode::kMaskedNormalized);
    CHECK(got == doctest::Approx(sum / n).epsilon(1e-12));
  }
}

TEST_CASE("masked loss ignores visible pixels bit for bit") {
  const PatchGrid grid{16, 16, 8};
  MaskSpec mask = MaskSpec::from_visible(4, {1, 2});
  Image rendered = test::random_image(41, 16, 16);
  Image target = test::random_image(42, 16, 16);
  const double before =
      masked_mse(rendered, target, mask, grid, LossMode::kMasked);

  Image poked = rendered;
  for (int t : mask.visible) {
    int py = (t / 2) * 8, px = (t % 2) * 8;
    for (int dy = 0; dy < 8; ++dy) {
      for (int dx = 0; dx < 8; ++dx) {
        for (int c = 0; c < 3; ++c) poked.at(py + dy, px + dx, c) += 7.5;
      }
    }
  }
  CHECK(masked_mse(poked, target, mask, grid, LossMode::kMasked) == before);
}

TEST_CASE("masked mse gradient matches finite differences and is sparse") {
  const PatchGrid grid{16, 16, 8};
  MaskSpec mask = MaskSpec::from_visible(4, {0, 2});
  Image rendered = test::random_image(51, 16, 16);
  Image target = test::random_image(52, 16, 16);
  for (LossMode mode :
       {LossMode::kMasked, LossMode::kAll, LossMode::kMaskedNormalized}) {
    Image grad = masked_mse_grad(rendered, target, mask, grid, mode);
    const double h = 1e-6;
    // Probe a handful of pixels, both masked and visible.
    for (auto [y, x] : {std::pair<int, int>{1, 9}, {9, 1}, {0, 0}, {12, 12},
                        {3, 14}, {14, 3}}) {
      for (int c = 0; c < 3; ++c) {
        Image p = rendered;
        p.at(y, x, c) += h;
        double lp = masked_mse(p, target, mask, grid, mode);
        p.at(y, x, c) -= 2 * h;
        double lm = masked_mse(p, target, mask, grid, mode);
        double fd = (lp - lm) / (2 * h);
        CHECK(grad.at(y, x, c) == doctest::Approx(fd).epsilon(1e-4));
      }
    }
  }

  // Visible pixels carry exactly zero gradient in the masked modes.
  Image grad =
      masked_mse_grad(rendered, target, mask, grid, LossMode::kMasked);
  for (int t : mask.visible) {
    int py = (t / 2) * 8, px = (t % 2) * 8;
    for (int dy = 0; dy < 8; ++dy) {
      for (int dx = 0; dx < 8; ++dx) {
        for (int c = 0; c < 3; ++c) {
          CHECK(grad.at(py + dy, px + dx, c) == 0.0);
        }
      }
    }
  }
}

TEST_CASE("an empty masked set is rejected in masked modes only") {
  const PatchGrid grid{16, 16, 8};
  MaskSpec full = MaskSpec::full(4);
  Image a = test::random_image(61, 16, 16);
  CHECK_THROWS_AS(masked_mse(a, a, full, grid, LossMode::kMasked), Error);
  CHECK_THROWS_AS(masked_mse(a, a, full, grid, LossMode::kMaskedNormalized),
                  Error);
  CHECK(masked_mse(a, a, full, grid, LossMode::kAll) == 0.0);
}

TEST_CASE("learning rate schedule warms up then decays to zero") {
  const double base = 0.1;
  CHECK(lr_schedule(0, base, 10, 100) == 0.0);
  CHECK(lr_schedule(5, base, 10, 100) == doctest::Approx(0.05));
  CHECK(lr_schedule(10, base, 10, 100) == doctest::Approx(base));
  CHECK(lr_schedule(55, base, 10, 100) == doctest::Approx(base / 2));
  CHECK(lr_schedule(100, base, 10, 100) == 0.0);
  CHECK(lr_schedule(200, base, 10, 100) == 0.0);
  CHECK(lr_schedule(99, base, 10, 100) > 0.0);
  for (long s = 11; s < 100; ++s) {
    CHECK(lr_schedule(s, base, 10, 100) <
          lr_schedule(s - 1, base, 10, 100) + 1e-15);
  }
  // No warmup: full rate from step zero.
  CHECK(lr_schedule(0, base, 0, 100) == doctest::Approx(base));
}

TEST_CASE("adamw with zero gradients is pure decoupled decay") {
  Mat w = Mat::Constant(2, 3, 2.0);
  AdamWConfig cfg;
  AdamW opt({{"w", &w}}, cfg);
  Mat zero = Mat::Zero(2, 3);
  const double lr = 0.1;
  opt.step({&zero}, lr);
  for (int i = 0; i < w.size(); ++i) {
    CHECK(w.data()[i] ==
          doctest::Approx(2.0 * (1.0 - lr * cfg.weight_decay)).epsilon(1e-15));
  }
  CHECK(opt.t() == 1);
}

TEST_CASE("adamw matches a scalar reference trace") {
  Mat w = Mat::Constant(1, 1, 1.0);
  AdamWConfig cfg;
  cfg.beta1 = 0.9;
  cfg.beta2 = 0.95;
  cfg.eps = 1e-8;
  cfg.weight_decay = 0.05;
  AdamW opt({{"w", &w}}, cfg);

  double theta = 1.0, m = 0.0, v = 0.0;
  const double lr = 0.01;
  for (int t = 1; t <= 5; ++t) {
    const double g = 0.3 * t;  // deterministic nonzero gradients
    Mat grad = Mat::Constant(1, 1, g);
    opt.step({&grad}, lr);

    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
    const double mhat = m / (1.0 - std::pow(cfg.beta1, t));
    const double vhat = v / (1.0 - std::pow(cfg.beta2, t));
    theta -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    theta -= lr * cfg.weight_decay * theta;
    CHECK(w(0, 0) == doctest::Approx(theta).epsilon(1e-13));
  }
}

TEST_CASE("adamw validates its configuration and inputs") {
  AdamWConfig bad;
  bad.beta1 = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  Mat w = Mat::Zero(1, 2);
  AdamW opt({{"w", &w}}, AdamWConfig{});
  Mat wrong = Mat::Zero(2, 2);
  CHECK_THROWS_AS(opt.step({&wrong}, 0.1), Error);
}

TEST_CASE("training twice from the same seed is bit identical") {
  auto corpus = tiny_corpus(4);
  std::vector<double> losses[2];
  for (int run = 0; run < 2; ++run) {
    GmaeModel model(tiny_config(), 11);
    Trainer trainer(model, tiny_train(), tiny_camera());
    losses[run] = trainer.run(corpus).losses;
  }
  REQUIRE(losses[0].size() == 4);  // 2 epochs x (4 / 2) steps
  CHECK(losses[0] == losses[1]);
  CHECK(std::isfinite(losses[0].back()));
}

TEST_CASE("the thread count does not change the arithmetic") {
  auto corpus = tiny_corpus(4);
  TrainConfig tc = tiny_train();
  tc.batch_size = 4;  // several chunks worth of samples per step
  std::vector<double> losses[2];
  std::vector<Mat> final_params[2];
  const char* threads[2] = {"1", "4"};
  for (int run = 0; run < 2; ++run) {
    setenv("GMAE_THREADS", threads[run], 1);
    GmaeModel model(tiny_config(), 13);
    Trainer trainer(model, tc, tiny_camera());
    losses[run] = trainer.run(corpus).losses;
    final_params[run] = snapshot(model);
  }
  unsetenv("GMAE_THREADS");
  CHECK(losses[0] == losses[1]);
  for (size_t i = 0; i < final_params[0].size(); ++i) {
    CHECK((final_params[0][i].array() == final_params[1][i].array()).all());
  }
}

TEST_CASE("a corrupt sample aborts the step before any update") {
  GmaeModel model(tiny_config(), 19);
  TrainConfig tc = tiny_train();
  Trainer trainer(model, tc, tiny_camera());
  auto before = snapshot(model);
  const long t_before = trainer.optimizer().t();

  std::vector<Image> batch = {make_shape_sample(1, 16).image,
                              make_shape_sample(2, 16).image};
  batch[1].at(3, 3, 0) = std::nan("");
  std::vector<MaskSpec> masks;
  for (int j = 0; j < 2; ++j) {
    Rng rng = Rng::stream(33, j);
    masks.push_back(sample_mask(4, 0.5, rng));
  }

  bool threw = false;
  try {
    trainer.train_step(batch, masks, 1e-3);
  } catch (const TrainError& e) {
    threw = true;
    CHECK(e.batch_index == 1);
  }
  CHECK(threw);
  CHECK(same_params(model, before));
  CHECK(trainer.optimizer().t() == t_before);
  CHECK(trainer.global_step() == 0);

  // The same batch with the bad sample repaired trains fine.
  batch[1].at(3, 3, 0) = 0.5;
  const double loss = trainer.train_step(batch, masks, 1e-3);
  CHECK(std::isfinite(loss));
  CHECK(trainer.global_step() == 1);
  CHECK(!same_params(model, before));
}

TEST_CASE("checkpoints round trip bit for bit") {
  const std::string path = "test_ckpt_roundtrip.bin";
  GmaeModel model(tiny_config(), 23);
  TrainConfig tc = tiny_train();
  Trainer trainer(model, tc, tiny_camera());
  auto corpus = tiny_corpus(2);
  trainer.run(corpus);  // leaves nonzero optimizer state behind
  save_checkpoint(path, model, &trainer.optimizer(), trainer.global_step(),
                  &tc);

  GmaeModel fresh(tiny_config(), 999);  // different init, same shapes
  Trainer fresh_trainer(fresh, tc, tiny_camera());
  Checkpoint ckpt = load_checkpoint(path);
  CHECK(ckpt.model_config == tiny_config());
  REQUIRE(ckpt.train_config.has_value());
  CHECK(ckpt.train_config->epochs == tc.epochs);
  CHECK(ckpt.global_step == trainer.global_step());

  apply_checkpoint(ckpt, fresh, &fresh_trainer.optimizer());
  auto a = model.collect_params();
  auto b = fresh.collect_params();
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i].value->array() == b[i].value->array()).all());
  }
  auto& m1 = trainer.optimizer().moment1();
  auto& m2 = fresh_trainer.optimizer().moment1();
  for (size_t i = 0; i < m1.size(); ++i) {
    CHECK((m1[i].array() == m2[i].array()).all());
  }
  CHECK(fresh_trainer.optimizer().t() == trainer.optimizer().t());
  std::remove(path.c_str());
}

TEST_CASE("corrupt checkpoint files are rejected whole") {
  const std::string path = "test_ckpt_corrupt.bin";
  GmaeModel model(tiny_config(), 29);
  save_checkpoint(path, model, nullptr, 7, nullptr);

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_checkpoint("no_such_checkpoint.bin"), FileError);
  }

  SUBCASE("truncation") {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    in.close();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<long>(bytes.size() * 3 / 5));
    out.close();
    try {
      load_checkpoint(path);
      CHECK(false);
    } catch (const CheckpointError& e) {
      CHECK(e.kind == CheckpointErrorKind::kCorruptFile);
    }
  }

  SUBCASE("bad magic") {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(0);
    f.write("NOTAMAGI", 8);
    f.close();
    try {
      load_checkpoint(path);
      CHECK(false);
    } catch (const CheckpointError& e) {
      CHECK(e.kind == CheckpointErrorKind::kCorruptFile);
    }
  }

  SUBCASE("future version") {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(8);
    const uint32_t v = 99;
    f.write(reinterpret_cast<const char*>(&v), 4);
    f.close();
    try {
      load_checkpoint(path);
      CHECK(false);
    } catch (const CheckpointError& e) {
      CHECK(e.kind == CheckpointErrorKind::kVersionMismatch);
    }
  }
  std::remove(path.c_str());
}

TEST_CASE("shape mismatches name the offending tensor and change nothing") {
  const std::string path = "test_ckpt_shape.bin";
  GmaeModel small(tiny_config(), 31);
  save_checkpoint(path, small, nullptr, 0, nullptr);

  ModelConfig big_cfg = tiny_config();
  big_cfg.queries = 9;
  GmaeModel big(big_cfg, 37);
  auto before = snapshot(big);

  Checkpoint ckpt = load_checkpoint(path);
  bool threw = false;
  try {
    apply_checkpoint(ckpt, big, nullptr);
  } catch (const CheckpointError& e) {
    threw = true;
    CHECK(e.kind == CheckpointErrorKind::kShapeMismatch);
    CHECK(std::string(e.what()).find("decoder.queries") != std::string::npos);
  }
  CHECK(threw);
  CHECK(same_params(big, before));
  std::remove(path.c_str());
}

TEST_CASE("a checkpoint without optimizer state still applies") {
  const std::string path = "test_ckpt_noopt.bin";
  GmaeModel model(tiny_config(), 41);
  save_checkpoint(path, model, nullptr, 12, nullptr);

  GmaeModel fresh(tiny_config(), 43);
  Trainer trainer(fresh, tiny_train(), tiny_camera());
  Checkpoint ckpt = load_checkpoint(path);
  CHECK(!ckpt.train_config.has_value());
  apply_checkpoint(ckpt, fresh, &trainer.optimizer());
  CHECK(trainer.optimizer().t() == 12);
  auto a = model.collect_params();
  auto b = fresh.collect_params();
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i].value->array() == b[i].value->array()).all());
  }
  std::remove(path.c_str());
}

TEST_CASE("trainer configuration is validated") {
  GmaeModel model(tiny_config(), 3);
  TrainConfig tc = tiny_train();
  tc.mask_ratio = 0.0;  // requires the all-pixel loss
  CHECK_THROWS_AS(Trainer(model, tc, tiny_camera()), Error);
  tc.loss_mode = LossMode::kAll;
  CHECK_NOTHROW(Trainer(model, tc, tiny_camera()));

  TrainConfig tc2 = tiny_train();
  CameraConfig wrong = tiny_camera();
  wrong.height = wrong.width = 32;  // camera disagrees with the model
  CHECK_THROWS_AS(Trainer(model, tc2, wrong), Error);
}
