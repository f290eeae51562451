"""Three-level Laplacian pyramid with exact reconstruction.

Decomposition produces two band-pass residual planes plus a low-frequency
base; adding each residual back after upsampling reproduces the input
bit-for-bit up to float round-off, for any input size (odd sizes use
ceil-halving). The smoothing filter is the 5-tap binomial [1, 4, 6, 4, 1]
with replicate boundaries, so constant images survive every stage exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .image import as_plane

# 5-tap binomial smoothing kernel (sums to 1).
_KERNEL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


def _smooth_axis(x: np.ndarray, axis: int) -> np.ndarray:
    """Correlate with the 5-tap kernel along `axis`, replicate boundary."""
    pad = [(0, 0)] * x.ndim
    pad[axis] = (2, 2)
    xp = np.pad(x, pad, mode="edge")
    n = x.shape[axis]
    out = np.zeros_like(x)
    sl = [slice(None)] * x.ndim
    for t in range(5):
        sl[axis] = slice(t, t + n)
        out += _KERNEL[t] * xp[tuple(sl)]
    return out


def gauss_down(img) -> np.ndarray:
    """Smooth with the binomial filter and keep every other sample.

    Decimation starts at index 0, so the output is ceil(h/2) x ceil(w/2).
    """
    plane = as_plane(img)
    h, w = plane.shape
    if h < 2 or w < 2:
        raise ShapeError(f"gauss_down needs at least 2x2, got {h}x{w}")
    smoothed = _smooth_axis(_smooth_axis(plane, 0), 1)
    return smoothed[::2, ::2].copy()


def _up_axis(x: np.ndarray, out_len: int, axis: int) -> np.ndarray:
    """Zero-insertion upsample along `axis` to `out_len`, then smooth.

    Equivalent to replicate-extending the source, inserting zeros between
    samples and correlating with the gain-2 kernel [1,4,6,4,1]/8; written
    in polyphase form. Source sample i lands at output position 2i.
    """
    x = np.moveaxis(x, axis, 0)
    m = x.shape[0]
    xp = np.concatenate([x[:1], x, x[-1:]], axis=0)  # replicate by 1
    even = (xp[:-2] + 6.0 * xp[1:-1] + xp[2:]) / 8.0  # position 2i
    odd = (4.0 * xp[1:-1] + 4.0 * xp[2:]) / 8.0  # position 2i+1
    n_even = (out_len + 1) // 2
    n_odd = out_len // 2
    out = np.empty((out_len,) + x.shape[1:], dtype=x.dtype)
    out[0::2] = even[:n_even]
    out[1::2] = odd[:n_odd]
    return np.moveaxis(out, 0, axis)


def _up_axis_adjoint(g: np.ndarray, in_len: int, axis: int) -> np.ndarray:
    """Exact adjoint of `_up_axis` (needed for backpropagation)."""
    g = np.moveaxis(g, axis, 0)
    out_len = g.shape[0]
    n_even = (out_len + 1) // 2
    n_odd = out_len // 2
    ge = g[0::2]
    go = g[1::2]
    # Accumulator over padded source indices -1 .. in_len (replicate pad 1).
    acc = np.zeros((in_len + 2,) + g.shape[1:], dtype=g.dtype)
    acc[0:n_even] += ge / 8.0
    acc[1:n_even + 1] += 6.0 * ge / 8.0
    acc[2:n_even + 2] += ge / 8.0
    acc[1:n_odd + 1] += go / 2.0
    acc[2:n_odd + 2] += go / 2.0
    out = acc[1:in_len + 1]
    out[0] += acc[0]
    out[-1] += acc[in_len + 1]
    return np.moveaxis(out, 0, axis)


def gauss_up(img, out_h: int, out_w: int) -> np.ndarray:
    """Upsample to (out_h, out_w), the pre-decimation size of `img`.

    The target dimensions must ceil-halve back to the input dimensions;
    constants are preserved exactly.
    """
    plane = as_plane(img)
    h, w = plane.shape
    if (out_h + 1) // 2 != h or (out_w + 1) // 2 != w:
        raise ShapeError(
            f"gauss_up target {out_h}x{out_w} does not ceil-halve to {h}x{w}"
        )
    return _up_axis(_up_axis(plane, out_h, 0), out_w, 1)


def gauss_up_adjoint(grad, in_h: int, in_w: int) -> np.ndarray:
    """Adjoint of `gauss_up`: maps a gradient at (out_h, out_w) back to
    the (in_h, in_w) source grid."""
    g = as_plane(grad)
    out_h, out_w = g.shape
    if (out_h + 1) // 2 != in_h or (out_w + 1) // 2 != in_w:
        raise ShapeError(
            f"adjoint target {in_h}x{in_w} does not match gradient {out_h}x{out_w}"
        )
    return _up_axis_adjoint(_up_axis_adjoint(g, in_w, 1), in_h, 0)


@dataclass
class LaplacianPyramid:
    """Ordered levels: s0, s1 are band-pass residuals, s2 the blurry base.

    Shapes chain by ceil-halving: s1 is ceil-half of s0, s2 of s1.
    """

    s0: np.ndarray
    s1: np.ndarray
    s2: np.ndarray

    def __post_init__(self):
        self.s0 = as_plane(self.s0)
        self.s1 = as_plane(self.s1)
        self.s2 = as_plane(self.s2)
        h0, w0 = self.s0.shape
        h1, w1 = self.s1.shape
        h2, w2 = self.s2.shape
        if ((h0 + 1) // 2, (w0 + 1) // 2) != (h1, w1):
            raise ShapeError(f"s1 shape {h1}x{w1} does not ceil-halve s0 {h0}x{w0}")
        if ((h1 + 1) // 2, (w1 + 1) // 2) != (h2, w2):
            raise ShapeError(f"s2 shape {h2}x{w2} does not ceil-halve s1 {h1}x{w1}")

    @property
    def levels(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.s0, self.s1, self.s2


def decompose(img) -> LaplacianPyramid:
    """Split an image into residual/residual/base pyramid levels."""
    plane = as_plane(img)
    h, w = plane.shape
    if h < 4 or w < 4:
        raise ShapeError(f"decompose needs at least 4x4, got {h}x{w}")
    g1 = gauss_down(plane)
    g2 = gauss_down(g1)
    s0 = plane - gauss_up(g1, h, w)
    s1 = g1 - gauss_up(g2, *g1.shape)
    return LaplacianPyramid(s0=s0, s1=s1, s2=g2)


def reconstruct(pyr: LaplacianPyramid) -> np.ndarray:
    """Invert `decompose`; exact up to float round-off."""
    g1 = pyr.s1 + gauss_up(pyr.s2, *pyr.s1.shape)
    return pyr.s0 + gauss_up(g1, *pyr.s0.shape)
