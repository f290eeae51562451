"""Synthetic ground-truth pair generator.

Manufactures (LR, HR) pairs with a known warp, luminance gain/offset,
spatially varying blur and noise, so that registration and the whole
restoration pipeline can be validated against exact truth. The noise
model (additive Gaussian plus uniform-value outliers at scattered
positions) only exists to stress the robust solver; it does not model a
camera.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, ShapeError
from .image import as_plane
from .registration import AffineTransform, warp_crop

_LR_MARGIN = 8  # extra source pixels beyond the mapped output frame


@dataclass
class DegradationSpec:
    """Exactly how an HR image is turned into its LR counterpart.

    tau_star maps HR-frame coordinates to LR coordinates (the transform
    that registration should recover); alpha_star/beta_star are the
    luminance gain/offset that map the LR image back onto the HR one.
    blur_sigma_map gives a per-pixel Gaussian sigma (None disables blur).
    """

    tau_star: AffineTransform
    alpha_star: float = 1.0
    beta_star: float = 0.0
    blur_sigma_map: np.ndarray | None = None
    noise_sigma: float = 0.0
    outlier_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.alpha_star) and self.alpha_star > 0):
            raise InvalidParameterError("alpha_star must be positive and finite")
        if not math.isfinite(self.beta_star):
            raise InvalidParameterError("beta_star must be finite")
        if self.noise_sigma < 0:
            raise InvalidParameterError("noise_sigma must be non-negative")
        if not (0.0 <= self.outlier_fraction <= 0.5):
            raise InvalidParameterError("outlier_fraction must lie in [0, 0.5]")
        if self.blur_sigma_map is not None:
            m = as_plane(self.blur_sigma_map)
            if (m < 0).any():
                raise InvalidParameterError("blur sigmas must be non-negative")
            self.blur_sigma_map = m


def _gaussian_taps(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian truncated at 3*sigma."""
    radius = max(1, int(math.ceil(3.0 * sigma)))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def _uniform_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with replicate borders (constant sigma)."""
    if sigma == 0.0:
        return img.copy()
    g = _gaussian_taps(sigma)
    r = g.size // 2
    out = img
    for axis in (0, 1):
        pad = [(0, 0), (0, 0)]
        pad[axis] = (r, r)
        xp = np.pad(out, pad, mode="edge")
        acc = np.zeros_like(out)
        n = out.shape[axis]
        sl = [slice(None), slice(None)]
        for t in range(g.size):
            sl[axis] = slice(t, t + n)
            acc += g[t] * xp[tuple(sl)]
        out = acc
    return out


def spatially_varying_blur(img, sigma_map) -> np.ndarray:
    """Per-pixel Gaussian blur: output(i, j) averages the replicate-padded
    neighborhood with the sigma(i, j) kernel (truncated at 3*sigma and
    renormalized); sigma = 0 passes the pixel through.

    Runs one uniform blur per distinct sigma value, so it is meant for
    maps with a modest number of distinct values.
    """
    plane = as_plane(img)
    smap = as_plane(sigma_map)
    if plane.shape != smap.shape:
        raise ShapeError(
            f"sigma map shape {smap.shape} != image shape {plane.shape}"
        )
    if (smap < 0).any():
        raise InvalidParameterError("blur sigmas must be non-negative")
    out = plane.copy()
    for sigma in np.unique(smap):
        if sigma == 0.0:
            continue
        mask = smap == sigma
        out[mask] = _uniform_blur(plane, float(sigma))[mask]
    return out


def _supersampled_warp(src, tau_inv: AffineTransform, out_h: int, out_w: int):
    """Inverse warp with 4x4 subpixel supersampling per output pixel.

    Averaging samples over each output pixel's footprint mimics sensor
    integration and antialiases the decimation; a plain one-tap bilinear
    warp at stride 2-4 aliases texture into the LR image, which would
    contaminate the oracle.
    """
    offs = (-0.375, -0.125, 0.125, 0.375)
    acc = None
    for oy in offs:
        for ox in offs:
            # Sampling at (u + o) equals shifting the translation by A(o).
            dx = tau_inv.a11 * ox + tau_inv.a12 * oy
            dy = tau_inv.a21 * ox + tau_inv.a22 * oy
            shifted = AffineTransform(
                tau_inv.a11,
                tau_inv.a12,
                tau_inv.a21,
                tau_inv.a22,
                tau_inv.tx + dx,
                tau_inv.ty + dy,
            )
            w = warp_crop(src, shifted, out_h, out_w)
            acc = w if acc is None else acc + w
    return acc / float(len(offs) ** 2)


def lr_shape_for(tau_star: AffineTransform, hr_shape: tuple[int, int]) -> tuple[int, int]:
    """LR dimensions that cover the tau-mapped HR frame plus a margin."""
    h, w = hr_shape
    hx = (w - 1) / 2.0
    hy = (h - 1) / 2.0
    xs = np.array([-hx, hx, -hx, hx])
    ys = np.array([-hy, -hy, hy, hy])
    sx, sy = tau_star.map_points(xs, ys)
    lr_w = int(math.ceil(2.0 * float(np.max(np.abs(sx))))) + 2 * _LR_MARGIN
    lr_h = int(math.ceil(2.0 * float(np.max(np.abs(sy))))) + 2 * _LR_MARGIN
    return lr_h, lr_w


def degrade(hr, spec: DegradationSpec) -> tuple[np.ndarray, DegradationSpec]:
    """Produce the LR counterpart of `hr` under `spec`.

    Stages: per-pixel blur (optics before sampling), inverse warp by
    tau_star^-1 onto an automatically sized LR grid, luminance inversion
    (v - beta)/alpha, seeded Gaussian noise, then outlier replacement with
    uniform random values at scattered positions. Fully deterministic per
    seed. Returns (lr, spec) so the truth record travels with the data.
    """
    plane = as_plane(hr)
    lr_h, lr_w = lr_shape_for(spec.tau_star, plane.shape)
    if lr_h > 4 * plane.shape[0] + 64 or lr_w > 4 * plane.shape[1] + 64:
        raise ShapeError(
            "tau_star maps the HR frame far outside a reasonable LR extent; "
            "is the transform inverted?"
        )
    blurred = plane
    if spec.blur_sigma_map is not None:
        if spec.blur_sigma_map.shape != plane.shape:
            raise ShapeError("blur_sigma_map must match the HR image shape")
        blurred = spatially_varying_blur(plane, spec.blur_sigma_map)
    geom = _supersampled_warp(blurred, spec.tau_star.invert(), lr_h, lr_w)
    lr_img = (geom - spec.beta_star) / spec.alpha_star
    rng = np.random.default_rng(spec.seed)
    if spec.noise_sigma > 0:
        lr_img = lr_img + rng.normal(0.0, spec.noise_sigma, size=lr_img.shape)
    if spec.outlier_fraction > 0:
        n = lr_img.size
        count = int(round(spec.outlier_fraction * n))
        idx = rng.choice(n, size=count, replace=False)
        flat = lr_img.ravel()
        flat[idx] = rng.uniform(0.0, 255.0, size=count)
        lr_img = flat.reshape(lr_img.shape)
    return lr_img, spec


def checker_and_ramp_corpus(n: int, size: int, seed: int = 0) -> list[np.ndarray]:
    """Deterministic texture-rich test images in [0, 255].

    Cycles through four smooth textured generators (filtered noise,
    sinusoid mixtures, Gaussian blobs, radial waves); every image has
    intensity standard deviation well above 10. Feature scales grow with
    the image size on purpose: these images double as registration
    oracles, and recovering the luminance gain to 1e-3 requires textures
    whose variance survives bilinear resampling essentially unattenuated,
    which means feature correlation lengths of tens of pixels.
    """
    images: list[np.ndarray] = []
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64)
    for i in range(n):
        rng = np.random.default_rng([seed, i])
        kind = i % 4
        if kind == 0:
            img = _uniform_blur(rng.normal(size=(size, size)), size / 11.0)
            img = (img - img.mean()) / max(img.std(), 1e-12)
            # tanh squash keeps tails smoothly inside range; hard clipping
            # would create saturated plateaus that starve the gradients.
            img = 3.0 * np.tanh(img / 3.0)
            img = (img - img.mean()) / max(img.std(), 1e-12)
            img = rng.uniform(112.0, 142.0) + 33.0 * img
        elif kind == 1:
            tx1, ty1 = rng.uniform(size / 2.2, size / 1.6, size=2)
            td = rng.uniform(size / 2.0, size / 1.4)
            ph = rng.uniform(0.0, 2.0 * np.pi, size=3)
            img = (
                rng.uniform(95.0, 150.0)
                + 55.0 * np.sin(2 * np.pi * xs / tx1 + ph[0])
                * np.sin(2 * np.pi * ys / ty1 + ph[1])
                + 25.0 * np.sin(2 * np.pi * (xs + ys) / td + ph[2])
            )
        elif kind == 2:
            img = np.zeros((size, size))
            for _ in range(12):
                cx, cy = rng.uniform(0, size, size=2)
                s = rng.uniform(size / 12.0, size / 5.0)
                amp = rng.uniform(-70.0, 70.0)
                img = img + amp * np.exp(
                    -((xs - cx) ** 2 + (ys - cy) ** 2) / (2.0 * s * s)
                )
            img = rng.uniform(110.0, 145.0) + 100.0 * np.tanh(img / 100.0)
        else:
            period = rng.uniform(size / 2.5, size / 1.8)
            cx, cy = rng.uniform(0.2 * size, 0.8 * size, size=2)
            r = np.hypot(xs - cx, ys - cy)
            img = rng.uniform(100.0, 140.0) + 60.0 * np.cos(2 * np.pi * r / period)
        images.append(np.clip(img, 0.0, 255.0))
    return images
