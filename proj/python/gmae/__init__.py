# Copyright Contributors to the gmae project
# SPDX-License-Identifier: Apache-2.0
"""Gaussian masked autoencoder.

Python surface over the C++ core: a differentiable 3D Gaussian splatting
renderer with analytic gradients, a masked ViT autoencoder whose decoder
emits Gaussian primitives, and zero-shot depth layering, edge detection,
and figure-ground segmentation derived from the layered renders.

Images are (H, W, 3) float64 arrays in [0, 1]; raw Gaussian parameters are
(K, 14) float64 arrays (position, scale, quaternion, color, opacity logits).
"""

from _gmae import (
    GmaeError,
    Model,
    activate,
    lr_schedule,
    masked_mse,
    mse,
    patchify,
    psnr,
    render,
    render_gradient,
    sample_mask,
    shape_sample,
    unpatchify,
)

__all__ = [
    "GmaeError",
    "Model",
    "activate",
    "lr_schedule",
    "masked_mse",
    "mse",
    "patchify",
    "psnr",
    "render",
    "render_gradient",
    "sample_mask",
    "shape_sample",
    "unpatchify",
]

__version__ = "0.1.0"
