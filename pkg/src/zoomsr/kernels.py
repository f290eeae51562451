"""Per-pixel kernel application and its exact adjoint.

A kernel field is a (k*k, h, w) float array holding one k x k filter per
pixel, stored row-major along the channel axis. Applying it computes, for
every pixel, the inner product of its filter with the replicate-padded
k x k neighborhood of the input. Predicted kernels are applied raw: no
softmax or normalization (an optional flag exists because serialized
tensors from other tools sometimes expect it).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ShapeError
from .image import as_plane
from .pyramid import LaplacianPyramid, decompose, reconstruct


def kernel_side(t: np.ndarray) -> int:
    """Return k for a (k*k, h, w) kernel field, validating oddness."""
    if t.ndim != 3:
        raise ShapeError(f"kernel field must be 3-D (k*k, h, w), got {t.shape}")
    k = math.isqrt(t.shape[0])
    if k * k != t.shape[0] or k % 2 == 0:
        raise ShapeError(
            f"kernel channel count {t.shape[0]} is not an odd square"
        )
    return k


def _shifted_stack(img: np.ndarray, k: int) -> np.ndarray:
    """(k*k, h, w) stack of replicate-padded k x k neighborhood taps."""
    c = k // 2
    h, w = img.shape
    padded = np.pad(img, c, mode="edge")
    out = np.empty((k * k, h, w), dtype=img.dtype)
    for a in range(k):
        for b in range(k):
            out[a * k + b] = padded[a:a + h, b:b + w]
    return out


def apply_kernels(img, t, normalize: bool = False) -> np.ndarray:
    """Apply a per-pixel kernel field to an image.

    output(i, j) = sum_{a,b} K(i,j)[a,b] * img(i+a-k//2, j+b-k//2) with
    replicate boundary; K(i,j) is t[:, i, j] reshaped row-major to k x k.
    With `normalize` each per-pixel kernel is divided by its tap sum
    first (default off).
    """
    plane = as_plane(img)
    t = np.asarray(t, dtype=np.float64)
    k = kernel_side(t)
    if t.shape[1:] != plane.shape:
        raise ShapeError(
            f"kernel field spatial dims {t.shape[1:]} != image dims {plane.shape}"
        )
    if normalize:
        sums = t.sum(axis=0)
        t = t / np.where(np.abs(sums) < 1e-12, 1.0, sums)
    taps = _shifted_stack(plane, k)
    return np.einsum("qhw,qhw->hw", t, taps)


def _fold_replicate_pad(buf: np.ndarray, c: int) -> np.ndarray:
    """Adjoint of replicate padding: sum pad bands onto the edge pixels."""
    if c == 0:
        return buf
    core = buf[c:-c, :].copy()
    core[0, :] += buf[:c, :].sum(axis=0)
    core[-1, :] += buf[-c:, :].sum(axis=0)
    out = core[:, c:-c].copy()
    out[:, 0] += core[:, :c].sum(axis=1)
    out[:, -1] += core[:, -c:].sum(axis=1)
    return out


def apply_kernels_grad(img, t, upstream) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradients of `apply_kernels` w.r.t. the kernel field and image.

    grad_t[(a,b), i, j] = upstream(i, j) * img(i+a-c, j+b-c) and grad_img
    is the transpose scatter of kernel weights times upstream, with the
    replicate-boundary adjoint accumulating clamped taps onto edge pixels.
    """
    plane = as_plane(img)
    t = np.asarray(t, dtype=np.float64)
    up = as_plane(upstream)
    k = kernel_side(t)
    if t.shape[1:] != plane.shape or up.shape != plane.shape:
        raise ShapeError(
            f"inconsistent shapes: img {plane.shape}, t {t.shape}, "
            f"upstream {up.shape}"
        )
    c = k // 2
    h, w = plane.shape
    grad_t = _shifted_stack(plane, k) * up[None, :, :]
    buf = np.zeros((h + 2 * c, w + 2 * c), dtype=np.float64)
    weighted = t * up[None, :, :]
    for a in range(k):
        for b in range(k):
            buf[a:a + h, b:b + w] += weighted[a * k + b]
    grad_img = _fold_replicate_pad(buf, c)
    return grad_t, grad_img


def apply_pyramid_kernels(pyr: LaplacianPyramid, t0, t1, t2) -> np.ndarray:
    """Filter each pyramid level with its kernel field and reconstruct.

    All three fields must share the same kernel size and match their
    level's dimensions.
    """
    tensors = [np.asarray(t, dtype=np.float64) for t in (t0, t1, t2)]
    ks = {kernel_side(t) for t in tensors}
    if len(ks) != 1:
        raise ShapeError(f"kernel fields disagree on kernel size: {sorted(ks)}")
    filtered = [
        apply_kernels(level, t)
        for level, t in zip(pyr.levels, tensors)
    ]
    return reconstruct(LaplacianPyramid(*filtered))


def influence_footprint(k: int, level: int, field_size: int = 64) -> tuple[int, int]:
    """Measured full-resolution bounding box of one pixel's influence.

    Places a unit impulse at the center of a zero image, routes it through
    decompose -> (all-ones k x k kernels at `level`, zeros elsewhere) ->
    reconstruct, and measures the bounding box of the nonzero output. This
    is the brute-force check behind the claim that small kernels at coarse
    levels act like large kernels at full resolution.
    """
    if k % 2 == 0 or k < 1:
        raise ShapeError("kernel size must be odd and positive")
    if level not in (0, 1, 2):
        raise ShapeError("level must be 0, 1 or 2")
    n = field_size
    img = np.zeros((n, n))
    img[n // 2, n // 2] = 1.0
    pyr = decompose(img)
    planes = [np.zeros_like(p) for p in pyr.levels]
    src = pyr.levels[level]
    ones = np.ones((k * k,) + src.shape)
    planes[level] = apply_kernels(src, ones)
    out = reconstruct(LaplacianPyramid(*planes))
    mask = np.abs(out) > 1e-12
    if not mask.any():
        return 0, 0
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    return int(rows[-1] - rows[0] + 1), int(cols[-1] - cols[0] + 1)
