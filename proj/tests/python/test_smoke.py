# Copyright Contributors to the gmae project
# SPDX-License-Identifier: Apache-2.0
"""End-to-end smoke tests for the Python bindings."""

import numpy as np
import pytest

import gmae


def centered_gaussian(color=(1.0, 0.0, 0.0), opacity=6.0):
    """One raw row: a Gaussian at the origin with the given color logits."""
    raw = np.zeros((1, 14))
    raw[0, 3:6] = -1.0  # moderate isotropic scale
    raw[0, 10:13] = [40.0 if c > 0.5 else -40.0 for c in color]
    raw[0, 13] = opacity
    return raw


def test_render_places_color_at_the_center():
    img = gmae.render(centered_gaussian(), size=32)
    assert img.shape == (32, 32, 3)
    center = img[16, 16]
    corner = img[0, 0]
    assert center[0] > 0.9  # saturated red against the black background
    assert center[1] < 0.01
    assert corner[0] < 1e-6
    # Renders are deterministic.
    again = gmae.render(centered_gaussian(), size=32)
    assert np.array_equal(img, again)


def test_render_gradient_matches_finite_differences():
    rng = np.random.default_rng(7)
    raw = np.zeros((2, 14))
    raw[:, 0:2] = rng.uniform(-0.5, 0.5, (2, 2))
    raw[:, 2] = [-0.4, 0.4]
    raw[:, 3:6] = rng.uniform(-1.6, -0.9, (2, 3))
    raw[:, 6:13] = rng.uniform(-1.0, 1.0, (2, 7))
    raw[:, 13] = rng.uniform(-1.0, 0.5, 2)
    weights = rng.uniform(-1.0, 1.0, (16, 16, 3))
    # A wide cutoff keeps the support boundary out of finite-difference range.
    opts = dict(size=16, cutoff=8.0)

    def loss(params):
        return float(np.sum(weights * gmae.render(params, **opts)))

    grad = gmae.render_gradient(raw, weights, **opts)
    assert grad.shape == raw.shape
    h = 1e-4
    for i in range(raw.shape[0]):
        for j in range(14):
            bumped = raw.copy()
            bumped[i, j] += h
            plus = loss(bumped)
            bumped[i, j] -= 2 * h
            minus = loss(bumped)
            fd = (plus - minus) / (2 * h)
            assert grad[i, j] == pytest.approx(fd, rel=1e-3, abs=1e-7)
    # Depth orders compositing but carries no gradient.
    assert np.all(grad[:, 2] == 0.0)


def test_activate_respects_parameter_ranges():
    rng = np.random.default_rng(3)
    raw = rng.normal(0.0, 2.0, (5, 14))
    g = gmae.activate(raw, scale_clamp=1.0)
    assert np.all(np.abs(g["centers"]) < 1.0)
    assert np.all((g["scales"] > 0.0) & (g["scales"] <= 1.0))
    assert np.allclose(np.linalg.norm(g["quaternions"], axis=1), 1.0)
    assert np.all((g["colors"] >= 0.0) & (g["colors"] <= 1.0))
    assert np.all((g["opacities"] > 0.0) & (g["opacities"] < 1.0))


def test_sample_mask_partitions_tokens():
    visible, masked = gmae.sample_mask(64, 0.75, seed=11)
    assert len(visible) == 16
    assert len(masked) == 48
    assert sorted(visible + masked) == list(range(64))
    assert gmae.sample_mask(64, 0.75, seed=11) == (visible, masked)
    assert gmae.sample_mask(64, 0.75, seed=12) != (visible, masked)
    with pytest.raises(gmae.GmaeError):
        gmae.sample_mask(64, 0.0, seed=1)


def test_patchify_round_trip():
    image, _ = gmae.shape_sample(5, size=32)
    tokens = gmae.patchify(image, patch=8)
    assert tokens.shape == (16, 192)
    back = gmae.unpatchify(tokens, 32, 32, patch=8)
    assert np.array_equal(back, image)


def test_psnr_and_masked_mse():
    image, _ = gmae.shape_sample(9, size=16)
    assert gmae.psnr(image, image) == np.inf
    shifted = image * 0.9 + 0.05
    assert gmae.mse(image, shifted) > 0.0

    visible = [0, 3]
    loss = gmae.masked_mse(shifted, image, visible, patch=8, mode="masked")
    assert loss > 0.0
    # Visible patches do not contribute.
    poked = shifted.copy()
    poked[0:8, 0:8] += 5.0  # patch 0 is visible
    assert gmae.masked_mse(poked, image, visible, patch=8,
                           mode="masked") == loss


def test_model_save_load_round_trip(tmp_path):
    model = gmae.Model(image_size=16, patch_size=8, enc_dim=16, enc_depth=1,
                       enc_heads=2, dec_dim=16, dec_depth=1, dec_heads=2,
                       queries=4, seed=21)
    assert model.config["queries"] == 4
    image, _ = gmae.shape_sample(2, size=16)
    raw = model.gaussians(image)
    assert raw.shape == (4, 14)
    recon = model.reconstruct(image, mask_ratio=0.5, seed=4)
    assert recon.shape == (16, 16, 3)
    assert np.all(np.isfinite(recon))

    path = str(tmp_path / "model.bin")
    model.save(path)
    loaded = gmae.Model.load(path)
    assert loaded.config == model.config
    assert np.array_equal(loaded.gaussians(image), raw)
    assert np.array_equal(loaded.reconstruct(image, mask_ratio=0.5, seed=4),
                          recon)

    with pytest.raises(gmae.GmaeError):
        gmae.Model.load(str(tmp_path / "missing.bin"))


def test_zero_shot_outputs_are_consistent(tmp_path):
    model = gmae.Model(image_size=16, patch_size=8, enc_dim=16, enc_depth=1,
                       enc_heads=2, dec_dim=16, dec_depth=1, dec_heads=2,
                       queries=6, seed=2)
    image, _ = gmae.shape_sample(8, size=16)
    out = model.layers(image, layers=3, threshold=0.02)
    assert out["boundaries"][-1] == 6
    assert out["layer_index"].shape == (16, 16)
    assert out["layer_index"].min() >= -1
    assert out["layer_index"].max() < 3
    assert len(out["cumulative"]) == 4
    assert out["edges"].dtype == bool

    figure = model.figure_mask(image, split=0, layers=3, threshold=0.02)
    assert np.array_equal(figure, out["layer_index"] >= 0)
    empty = model.figure_mask(image, split=3, layers=3, threshold=0.02)
    assert not empty.any()
