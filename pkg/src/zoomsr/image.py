"""Image containers, color conversion, cropping and bilinear sampling.

A single-channel image plane is a plain 2-D float64 array; an RGB image is
an (H, W, 3) float64 array with values nominally in [0, 255]. 8-bit files
are promoted to float64 on load. All resampling uses replicate
(clamp-to-edge) boundary extension, which preserves constant images.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from .errors import DataIOError, ShapeError

# ITU-R BT.601 studio-swing luma weights for 8-bit RGB in [0, 255].
_Y_WEIGHTS = np.array([65.481, 128.553, 24.966]) / 255.0
_Y_OFFSET = 16.0


def as_plane(arr) -> np.ndarray:
    """Validate and return `arr` as a 2-D float64 image plane."""
    out = np.asarray(arr, dtype=np.float64)
    if out.ndim != 2:
        raise ShapeError(f"expected a 2-D image plane, got shape {out.shape}")
    if not np.isfinite(out).all():
        raise ShapeError("image plane contains non-finite values")
    return out


def as_rgb(arr) -> np.ndarray:
    """Validate and return `arr` as an (H, W, 3) float64 RGB image."""
    out = np.asarray(arr, dtype=np.float64)
    if out.ndim != 3 or out.shape[2] != 3:
        raise ShapeError(f"expected an (H, W, 3) RGB image, got shape {out.shape}")
    if not np.isfinite(out).all():
        raise ShapeError("RGB image contains non-finite values")
    return out


def rgb_to_y(img) -> np.ndarray:
    """Extract the Y channel (BT.601 studio swing) from an RGB image.

    Y = 16 + (65.481 R + 128.553 G + 24.966 B) / 255 with R, G, B in
    [0, 255]; the result is clamped to [0, 255].
    """
    rgb = as_rgb(img)
    y = _Y_OFFSET + rgb @ _Y_WEIGHTS
    return np.clip(y, 0.0, 255.0)


def crop_center(img, out_h: int, out_w: int) -> np.ndarray:
    """Return the centered (out_h, out_w) window of `img`.

    When the leftover size is odd the extra row/column goes to the
    bottom/right (the top/left offset is floored).
    """
    plane = as_plane(img)
    h, w = plane.shape
    if out_h > h or out_w > w:
        raise ShapeError(f"crop {out_h}x{out_w} exceeds image {h}x{w}")
    if out_h < 1 or out_w < 1:
        raise ShapeError("crop size must be at least 1x1")
    top = (h - out_h) // 2
    left = (w - out_w) // 2
    return plane[top:top + out_h, left:left + out_w].copy()


def sample_bilinear(img, x, y):
    """Bilinearly sample `img` at continuous positions (x=column, y=row).

    Coordinates outside [0, W-1] x [0, H-1] are clamped to the border
    (replicate extension). Accepts scalars or arrays of coordinates and
    returns a matching shape.
    """
    plane = as_plane(img)
    h, w = plane.shape
    scalar = np.ndim(x) == 0 and np.ndim(y) == 0
    xc = np.clip(np.asarray(x, dtype=np.float64), 0.0, float(w - 1))
    yc = np.clip(np.asarray(y, dtype=np.float64), 0.0, float(h - 1))
    x0 = np.floor(xc).astype(np.intp)
    y0 = np.floor(yc).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xc - x0
    fy = yc - y0
    top = plane[y0, x0] * (1.0 - fx) + plane[y0, x1] * fx
    bot = plane[y1, x0] * (1.0 - fx) + plane[y1, x1] * fx
    out = top * (1.0 - fy) + bot * fy
    return float(out) if scalar else out


def load_image(path) -> np.ndarray:
    """Load a PNG as float64: (H, W) for grayscale, (H, W, 3) for color."""
    try:
        with Image.open(path) as im:
            if im.mode == "L":
                return np.asarray(im, dtype=np.float64)
            if im.mode != "RGB":
                im = im.convert("RGB")
            return np.asarray(im, dtype=np.float64)
    except FileNotFoundError as exc:
        raise DataIOError(f"cannot open image: {path}") from exc
    except OSError as exc:
        raise DataIOError(f"not a readable image file: {path} ({exc})") from exc


def load_y(path) -> np.ndarray:
    """Load a PNG and return its Y plane (grayscale files pass through)."""
    img = load_image(path)
    if img.ndim == 2:
        return img
    return rgb_to_y(img)


def save_image(path, arr) -> None:
    """Save a float image as an 8-bit PNG, clamping values to [0, 255]."""
    data = np.asarray(arr, dtype=np.float64)
    if data.ndim == 2:
        mode = "L"
    elif data.ndim == 3 and data.shape[2] == 3:
        mode = "RGB"
    else:
        raise ShapeError(f"cannot save array of shape {data.shape} as PNG")
    quantized = np.clip(np.rint(data), 0, 255).astype(np.uint8)
    try:
        Image.fromarray(quantized, mode=mode).save(path, format="PNG")
    except OSError as exc:
        raise DataIOError(f"cannot write image: {path} ({exc})") from exc
