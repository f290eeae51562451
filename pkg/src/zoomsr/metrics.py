"""PSNR and SSIM on the luma channel.

Both metrics run on floating-point Y planes (no 8-bit clamping). SSIM
uses the classic 11x11 Gaussian window with sigma 1.5, k1 = 0.01,
k2 = 0.03 and dynamic range 255, averaged over fully-interior windows
only (no boundary padding) — the two choices that most often make
implementations disagree, fixed here and documented.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidParameterError, ShapeError
from .image import as_plane, rgb_to_y

PSNR_CAP_DB = 100.0


def psnr(a, b, peak: float = 255.0) -> float:
    """10*log10(peak^2 / MSE) in decibels, capped at 100 dB.

    Near-identical inputs (MSE below 1e-12) return the 100 dB cap, which
    is a reporting convention rather than a mathematical value.
    """
    pa = as_plane(a)
    pb = as_plane(b)
    if pa.shape != pb.shape:
        raise ShapeError(f"psnr operands differ in shape: {pa.shape} vs {pb.shape}")
    mse = float(np.mean((pa - pb) ** 2))
    if mse < 1e-12:
        return PSNR_CAP_DB
    return min(10.0 * math.log10(peak * peak / mse), PSNR_CAP_DB)


@dataclass(frozen=True)
class SsimConfig:
    window_size: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 255.0

    def __post_init__(self):
        if self.window_size < 1 or self.window_size % 2 == 0:
            raise InvalidParameterError("window_size must be odd and positive")
        if self.sigma <= 0 or self.k1 <= 0 or self.k2 <= 0:
            raise InvalidParameterError("sigma, k1 and k2 must be positive")

    def window(self) -> np.ndarray:
        """Normalized 1-D Gaussian; the 2-D window is its outer product."""
        half = self.window_size // 2
        x = np.arange(-half, half + 1, dtype=np.float64)
        g = np.exp(-(x * x) / (2.0 * self.sigma * self.sigma))
        return g / g.sum()


def _window_filter(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Separable correlation with the window, valid positions only."""
    t = sliding_window_view(x, g.size, axis=0) @ g
    return sliding_window_view(t, g.size, axis=1) @ g


def ssim(a, b, cfg: SsimConfig | None = None) -> float:
    """Mean structural similarity over all fully-interior windows."""
    cfg = cfg or SsimConfig()
    pa = as_plane(a)
    pb = as_plane(b)
    if pa.shape != pb.shape:
        raise ShapeError(f"ssim operands differ in shape: {pa.shape} vs {pb.shape}")
    if min(pa.shape) < cfg.window_size:
        raise ShapeError(
            f"image {pa.shape} smaller than the {cfg.window_size}x"
            f"{cfg.window_size} window"
        )
    g = cfg.window()
    mu_a = _window_filter(pa, g)
    mu_b = _window_filter(pb, g)
    var_a = _window_filter(pa * pa, g) - mu_a * mu_a
    var_b = _window_filter(pb * pb, g) - mu_b * mu_b
    cov = _window_filter(pa * pb, g) - mu_a * mu_b
    c1 = (cfg.k1 * cfg.dynamic_range) ** 2
    c2 = (cfg.k2 * cfg.dynamic_range) ** 2
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def evaluate_pair(pred_rgb, gt_rgb, shave: int = 0) -> tuple[float, float]:
    """Y-channel PSNR and SSIM between a prediction and its ground truth.

    Both images are converted through the BT.601 Y extraction; `shave`
    optionally drops a pixel border before measuring (off by default:
    the evaluation protocol does not shave).
    """
    ya = rgb_to_y(pred_rgb)
    yb = rgb_to_y(gt_rgb)
    if shave:
        if shave * 2 >= min(ya.shape):
            raise ShapeError(f"shave {shave} removes the whole image")
        ya = ya[shave:-shave, shave:-shave]
        yb = yb[shave:-shave, shave:-shave]
    return psnr(ya, yb, peak=255.0), ssim(ya, yb)
