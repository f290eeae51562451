"""Desk-scale trainable kernel-prediction network, from scratch.

The architecture mirrors the full-scale design at reduced width/depth: the
input Y plane is channel-shuffled down by 4, run through a shared
residual-block backbone, then split into three heads that emit one k*k
kernel field per pyramid level (the two finer levels upsample their
features by channel-to-space shuffles of 4 and 2 first). Every layer has
a hand-written exact backward pass; training uses bias-corrected Adam on
a plain L2 loss.

Convolutions are 3x3, stride 1, zero padding 1 and are immediately
followed by ReLU everywhere except the three head output layers, which
emit raw kernel values.

Parameters live in a flat dict name -> float64 array; layer names are
"entry", "block{i}.conv1/.conv2", "tail", "head{l}.conv1/.conv2/.out",
each with ".w" (out, in, 3, 3) and ".b" (out,) entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, InvalidParameterError, ShapeError
from .image import as_plane
from .kernels import apply_kernels, apply_kernels_grad
from .pyramid import LaplacianPyramid, decompose, gauss_up_adjoint, reconstruct


@dataclass(frozen=True)
class ModelConfig:
    """Network hyperparameters.

    Full-scale settings are 16 residual blocks at width 64; the toy
    defaults (2 blocks, width 16) exercise every layer type and the whole
    gradient path at desk scale. Width must be a multiple of 16 because
    the finest head rearranges width channels into a 4x4 spatial block.
    """

    num_res_blocks: int = 2
    width: int = 16
    kernel_size: int = 5
    shuffle_factor: int = 4

    def __post_init__(self):
        if self.num_res_blocks < 1:
            raise InvalidParameterError("num_res_blocks must be >= 1")
        if self.width < 16 or self.width % 16 != 0:
            raise InvalidParameterError(
                "width must be a positive multiple of 16 (the finest head "
                "shuffles width channels into a 4x4 spatial block)"
            )
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise InvalidParameterError("kernel_size must be odd and positive")
        if self.shuffle_factor != 4:
            raise InvalidParameterError("shuffle_factor is fixed at 4")


# ---------------------------------------------------------------------------
# Elementary layers
# ---------------------------------------------------------------------------


def _as_fmap(x) -> np.ndarray:
    out = np.asarray(x, dtype=np.float64)
    if out.ndim != 3:
        raise ShapeError(f"expected a (C, H, W) feature map, got {out.shape}")
    return out


def _im2col(x: np.ndarray) -> np.ndarray:
    """(C, H, W) -> (C*9, H*W) patch matrix for a 3x3/pad-1 convolution."""
    c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    cols = np.empty((c, 9, h, w), dtype=x.dtype)
    i = 0
    for dy in range(3):
        for dx in range(3):
            cols[:, i] = xp[:, dy:dy + h, dx:dx + w]
            i += 1
    return cols.reshape(c * 9, h * w)


def conv2d_forward(x, w, b) -> np.ndarray:
    """3x3 cross-correlation, stride 1, zero padding 1.

    x: (C_in, H, W); w: (C_out, C_in, 3, 3); b: (C_out,).
    """
    x = _as_fmap(x)
    w = np.asarray(w, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if w.ndim != 4 or w.shape[2:] != (3, 3):
        raise ShapeError(f"conv weights must be (O, C, 3, 3), got {w.shape}")
    if w.shape[1] != x.shape[0]:
        raise ShapeError(
            f"conv expects {w.shape[1]} input channels, got {x.shape[0]}"
        )
    if b.shape != (w.shape[0],):
        raise ShapeError(f"bias shape {b.shape} != ({w.shape[0]},)")
    _, h, width = x.shape
    out = w.reshape(w.shape[0], -1) @ _im2col(x)
    return out.reshape(w.shape[0], h, width) + b[:, None, None]


def conv2d_backward(x, w, grad_out) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact gradients of `conv2d_forward` w.r.t. input, weights and bias."""
    x = _as_fmap(x)
    w = np.asarray(w, dtype=np.float64)
    g = _as_fmap(grad_out)
    c_out, c_in = w.shape[:2]
    _, h, width = x.shape
    if g.shape != (c_out, h, width):
        raise ShapeError(f"grad shape {g.shape} != ({c_out}, {h}, {width})")
    gm = g.reshape(c_out, -1)
    cols = _im2col(x)
    grad_b = g.sum(axis=(1, 2))
    grad_w = (gm @ cols.T).reshape(w.shape)
    gcols = (w.reshape(c_out, -1).T @ gm).reshape(c_in, 9, h, width)
    gxp = np.zeros((c_in, h + 2, width + 2), dtype=np.float64)
    i = 0
    for dy in range(3):
        for dx in range(3):
            gxp[:, dy:dy + h, dx:dx + width] += gcols[:, i]
            i += 1
    return gxp[:, 1:h + 1, 1:width + 1], grad_w, grad_b


def relu(x) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(x, grad_out) -> np.ndarray:
    """Masked gradient; the subgradient at exactly 0 is taken as 0."""
    return np.where(np.asarray(x) > 0.0, grad_out, 0.0)


def residual_block(x, w1, b1, w2, b2) -> np.ndarray:
    """x + conv2(relu(conv1(x))); channel count is preserved."""
    return x + conv2d_forward(relu(conv2d_forward(x, w1, b1)), w2, b2)


def space_to_depth(x, r: int) -> np.ndarray:
    """Rearrange an (H, W) plane or (C, H, W) map into r*r-fold channels.

    Block offsets map to channels in row-major order, so for a 2-D input
    with r=2 the four output planes hold the pixels (0,0), (0,1), (1,0),
    (1,1) of each block. Dimensions must be divisible by r.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise ShapeError(f"expected 2-D or 3-D input, got shape {arr.shape}")
    if r < 1:
        raise ShapeError("shuffle factor must be >= 1")
    c, h, w = arr.shape
    if h % r or w % r:
        raise ShapeError(f"dims {h}x{w} not divisible by shuffle factor {r}")
    out = arr.reshape(c, h // r, r, w // r, r)
    return np.ascontiguousarray(out.transpose(0, 2, 4, 1, 3)).reshape(
        c * r * r, h // r, w // r
    )


def depth_to_space(x, r: int) -> np.ndarray:
    """Inverse of `space_to_depth`. A resulting single channel is returned
    as a 2-D plane so the plane round-trip is exact."""
    arr = _as_fmap(x)
    if r < 1:
        raise ShapeError("shuffle factor must be >= 1")
    c2, h, w = arr.shape
    if c2 % (r * r):
        raise ShapeError(f"channel count {c2} not divisible by {r * r}")
    c = c2 // (r * r)
    out = arr.reshape(c, r, r, h, w)
    out = np.ascontiguousarray(out.transpose(0, 3, 1, 4, 2)).reshape(
        c, h * r, w * r
    )
    return out[0] if c == 1 else out


def pad_to_multiple(img, m: int = 4) -> tuple[np.ndarray, tuple[int, int]]:
    """Replicate-pad bottom/right so both dims are multiples of `m`.

    Returns the padded plane and the (rows, cols) amounts to crop after
    reconstruction.
    """
    plane = as_plane(img)
    h, w = plane.shape
    ph = (-h) % m
    pw = (-w) % m
    if ph or pw:
        plane = np.pad(plane, ((0, ph), (0, pw)), mode="edge")
    return plane, (ph, pw)


def loss_l2(pred, target) -> tuple[float, np.ndarray]:
    """Sum of squared differences and its gradient 2*(pred - target)."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape:
        raise ShapeError(f"loss operands differ in shape: {p.shape} vs {t.shape}")
    diff = p - t
    return float((diff * diff).sum()), 2.0 * diff


# ---------------------------------------------------------------------------
# Network assembly
# ---------------------------------------------------------------------------


def _layer_plan(cfg: ModelConfig) -> list[tuple[str, int, int]]:
    w = cfg.width
    k2 = cfg.kernel_size ** 2
    plan = [("entry", 16, w)]
    for i in range(cfg.num_res_blocks):
        plan.append((f"block{i}.conv1", w, w))
        plan.append((f"block{i}.conv2", w, w))
    plan.append(("tail", w, w))
    plan += [
        ("head0.conv1", w // 16, w),
        ("head0.conv2", w, w),
        ("head0.out", w, k2),
        ("head1.conv1", w // 4, w),
        ("head1.conv2", w, w),
        ("head1.out", w, k2),
        ("head2.conv1", w, w),
        ("head2.conv2", w, w),
        ("head2.out", w, k2),
    ]
    return plan


def init_params(cfg: ModelConfig, seed: int = 0) -> dict[str, np.ndarray]:
    """He fan-in normal weights (std = sqrt(2 / (9 * C_in))), zero biases."""
    rng = np.random.default_rng(seed)
    params: dict[str, np.ndarray] = {}
    for name, c_in, c_out in _layer_plan(cfg):
        std = math.sqrt(2.0 / (9.0 * c_in))
        params[name + ".w"] = rng.normal(0.0, std, size=(c_out, c_in, 3, 3))
        params[name + ".b"] = np.zeros(c_out)
    return params


def _conv_relu(name, x, params, cache):
    pre = conv2d_forward(x, params[name + ".w"], params[name + ".b"])
    cache[name + ".in"] = x
    cache[name + ".pre"] = pre
    return relu(pre)


def _conv_raw(name, x, params, cache):
    cache[name + ".in"] = x
    return conv2d_forward(x, params[name + ".w"], params[name + ".b"])


def predict_kernels(y, cfg: ModelConfig, params, with_cache: bool = False):
    """Run the network on a Y plane, emitting three kernel fields.

    The input must already be padded to a multiple of 4 (see
    `pad_to_multiple`). For an (h, w) input the fields are shaped
    (k*k, h, w), (k*k, h/2, w/2) and (k*k, h/4, w/4). With `with_cache`
    a fourth return value carries intermediates for the backward pass.
    """
    plane = as_plane(y)
    h, w = plane.shape
    if h % 4 or w % 4:
        raise ShapeError(
            f"input dims {h}x{w} must be multiples of 4; use pad_to_multiple"
        )
    cache: dict[str, np.ndarray] = {}
    x = space_to_depth(plane, 4)
    f = _conv_relu("entry", x, params, cache)
    for i in range(cfg.num_res_blocks):
        hmid = _conv_relu(f"block{i}.conv1", f, params, cache)
        f = f + _conv_raw(f"block{i}.conv2", hmid, params, cache)
    ft = _conv_relu("tail", f, params, cache)

    b0 = depth_to_space(ft, 4)
    if b0.ndim == 2:  # width 16 leaves a single channel
        b0 = b0[None]
    h0 = _conv_relu("head0.conv1", b0, params, cache)
    h0 = _conv_relu("head0.conv2", h0, params, cache)
    t0 = _conv_raw("head0.out", h0, params, cache)

    b1 = depth_to_space(ft, 2)
    h1 = _conv_relu("head1.conv1", b1, params, cache)
    h1 = _conv_relu("head1.conv2", h1, params, cache)
    t1 = _conv_raw("head1.out", h1, params, cache)

    h2 = _conv_relu("head2.conv1", ft, params, cache)
    h2 = _conv_relu("head2.conv2", h2, params, cache)
    t2 = _conv_raw("head2.out", h2, params, cache)

    if with_cache:
        return t0, t1, t2, cache
    return t0, t1, t2


def _conv_relu_back(name, grad, params, cache, grads):
    gpre = relu_backward(cache[name + ".pre"], grad)
    gx, gw, gb = conv2d_backward(cache[name + ".in"], params[name + ".w"], gpre)
    grads[name + ".w"] += gw
    grads[name + ".b"] += gb
    return gx


def _conv_raw_back(name, grad, params, cache, grads):
    gx, gw, gb = conv2d_backward(cache[name + ".in"], params[name + ".w"], grad)
    grads[name + ".w"] += gw
    grads[name + ".b"] += gb
    return gx


def predict_kernels_backward(cfg, params, cache, gt0, gt1, gt2, grads=None):
    """Backpropagate kernel-field gradients to parameter gradients.

    Accumulates into `grads` when given (same keys as `params`), which
    lets a mini-batch share one buffer.
    """
    if grads is None:
        grads = {k: np.zeros_like(v) for k, v in params.items()}

    g = _conv_raw_back("head0.out", gt0, params, cache, grads)
    g = _conv_relu_back("head0.conv2", g, params, cache, grads)
    g = _conv_relu_back("head0.conv1", g, params, cache, grads)
    gft = space_to_depth(g, 4)

    g = _conv_raw_back("head1.out", gt1, params, cache, grads)
    g = _conv_relu_back("head1.conv2", g, params, cache, grads)
    g = _conv_relu_back("head1.conv1", g, params, cache, grads)
    gft = gft + space_to_depth(g, 2)

    g = _conv_raw_back("head2.out", gt2, params, cache, grads)
    g = _conv_relu_back("head2.conv2", g, params, cache, grads)
    gft = gft + _conv_relu_back("head2.conv1", g, params, cache, grads)

    g = _conv_relu_back("tail", gft, params, cache, grads)
    for i in range(cfg.num_res_blocks - 1, -1, -1):
        gmid = _conv_raw_back(f"block{i}.conv2", g, params, cache, grads)
        g = g + _conv_relu_back(f"block{i}.conv1", gmid, params, cache, grads)
    _conv_relu_back("entry", g, params, cache, grads)
    return grads


# ---------------------------------------------------------------------------
# Optimizer and training loop
# ---------------------------------------------------------------------------


@dataclass
class AdamState:
    """First/second moment accumulators plus the fixed hyperparameters
    (defaults: beta1 0.9, beta2 0.999, eps 1e-8, lr 1e-4)."""

    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    @classmethod
    def for_params(cls, params, **kwargs) -> "AdamState":
        state = cls(**kwargs)
        state.m = {k: np.zeros_like(p) for k, p in params.items()}
        state.v = {k: np.zeros_like(p) for k, p in params.items()}
        return state


def adam_step(params, grads, state: AdamState):
    """One bias-corrected Adam update, in place. Returns (params, state)."""
    state.step += 1
    t = state.step
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    for name, g in grads.items():
        if g.shape != params[name].shape:
            raise ShapeError(f"gradient shape mismatch for {name}")
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        params[name] -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return params, state


def _forward_loss(lr_y, hr_y, cfg, params, want_grads):
    """Full pipeline loss for one pair: network -> per-level kernel apply
    -> pyramid reconstruction -> L2 against the target."""
    pyr = decompose(lr_y)
    if want_grads:
        t0, t1, t2, cache = predict_kernels(lr_y, cfg, params, with_cache=True)
    else:
        t0, t1, t2 = predict_kernels(lr_y, cfg, params)
    a0 = apply_kernels(pyr.s0, t0)
    a1 = apply_kernels(pyr.s1, t1)
    a2 = apply_kernels(pyr.s2, t2)
    pred = reconstruct(LaplacianPyramid(a0, a1, a2))
    loss, gpred = loss_l2(pred, hr_y)
    if not want_grads:
        return loss, None
    g0 = gpred
    g_mid = gauss_up_adjoint(gpred, *pyr.s1.shape)
    g1 = g_mid
    g2 = gauss_up_adjoint(g_mid, *pyr.s2.shape)
    gt0, _ = apply_kernels_grad(pyr.s0, t0, g0)
    gt1, _ = apply_kernels_grad(pyr.s1, t1, g1)
    gt2, _ = apply_kernels_grad(pyr.s2, t2, g2)
    return loss, (cache, gt0, gt1, gt2)


def pipeline_loss(lr_y, hr_y, cfg, params) -> float:
    """Loss of the composite pipeline on one (LR, HR) pair."""
    loss, _ = _forward_loss(as_plane(lr_y), as_plane(hr_y), cfg, params, False)
    return loss


def _augment(lr_y, hr_y, rng):
    k = int(rng.integers(0, 4))
    flip = bool(rng.integers(0, 2))
    a, b = np.rot90(lr_y, k), np.rot90(hr_y, k)
    if flip:
        a, b = np.fliplr(a), np.fliplr(b)
    return np.ascontiguousarray(a), np.ascontiguousarray(b)


def train_toy(
    pairs,
    cfg: ModelConfig,
    iters: int,
    seed: int = 0,
    batch_size: int = 4,
    lr: float = 1e-4,
    augment: bool = False,
):
    """Train the network on (lr_y, hr_y) patch pairs.

    Deterministic given the seed. Returns the trained parameter dict and
    the loss curve: entry 0 is the mean dataset loss before any update,
    then one mean batch loss per Adam step (when the dataset is no larger
    than the batch, every step uses the whole dataset in order). Raises
    DivergenceError on a non-finite loss.
    """
    if not pairs:
        raise InvalidParameterError("need at least one training pair")
    data = []
    for lr_img, hr_img in pairs:
        a, b = as_plane(lr_img), as_plane(hr_img)
        if a.shape != b.shape:
            raise ShapeError(f"pair shapes differ: {a.shape} vs {b.shape}")
        if a.shape[0] % 4 or a.shape[1] % 4:
            raise ShapeError("training patches must have dims divisible by 4")
        data.append((a, b))

    params = init_params(cfg, seed)
    state = AdamState.for_params(params, lr=lr)
    rng = np.random.default_rng(seed + 1)
    n = len(data)

    initial = float(
        np.mean([_forward_loss(a, b, cfg, params, False)[0] for a, b in data])
    )
    losses = [initial]
    for it in range(iters):
        if n <= batch_size:
            idx = np.arange(n)
        else:
            idx = rng.integers(0, n, size=batch_size)
        grads = {k: np.zeros_like(p) for k, p in params.items()}
        batch_loss = 0.0
        for i in idx:
            a, b = data[i]
            if augment:
                a, b = _augment(a, b, rng)
            loss, back = _forward_loss(a, b, cfg, params, True)
            batch_loss += loss
            cache, gt0, gt1, gt2 = back
            predict_kernels_backward(cfg, params, cache, gt0, gt1, gt2, grads)
        scale = 1.0 / len(idx)
        batch_loss *= scale
        if not math.isfinite(batch_loss):
            raise DivergenceError(
                f"non-finite loss {batch_loss} at iteration {it + 1}"
            )
        for k in grads:
            grads[k] *= scale
        adam_step(params, grads, state)
        losses.append(batch_loss)
    return params, np.asarray(losses)


def super_resolve(y, params, cfg: ModelConfig) -> np.ndarray:
    """Restore a Y plane of any size: pad, predict kernels, filter the
    pyramid, reconstruct, crop the padding back off."""
    padded, (ph, pw) = pad_to_multiple(as_plane(y), 4)
    t0, t1, t2 = predict_kernels(padded, cfg, params)
    pyr = decompose(padded)
    a0 = apply_kernels(pyr.s0, t0)
    a1 = apply_kernels(pyr.s1, t1)
    a2 = apply_kernels(pyr.s2, t2)
    out = reconstruct(LaplacianPyramid(a0, a1, a2))
    if ph:
        out = out[:-ph]
    if pw:
        out = out[:, :-pw]
    return out
