"""Command-line entry points.

Subcommands: register, pyramid, apply, train, eval, synth. Exit codes:
0 on success, 1 on usage errors, 2 on data/validation errors. Errors go
to stderr with stable grep-able prefixes (ERR_IO, ERR_SHAPE,
ERR_SINGULAR, ERR_DIVERGE, ERR_CONFIG, ERR_DATA). Report-producing
commands write a matplotlib figure next to their delimited outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import plots
from .config import load_config
from .container import read_tensor, write_tensor
from .errors import DataIOError, ShapeError, ZoomSRError
from .image import load_image, load_y, rgb_to_y, save_image
from .kernels import apply_kernels
from .metrics import psnr as psnr_fn
from .metrics import ssim as ssim_fn
from .nn import train_toy
from .pyramid import LaplacianPyramid, decompose, reconstruct
from .registration import AffineTransform, make_transform, register
from .synth import DegradationSpec, checker_and_ramp_corpus, degrade


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _fmt_floats(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def _write_truth(path: Path, spec: DegradationSpec) -> None:
    tau = spec.tau_star
    lines = [
        f"tau {_fmt_floats(tau.params)}",
        f"alpha {spec.alpha_star!r}",
        f"beta {spec.beta_star!r}",
        f"noise_sigma {spec.noise_sigma!r}",
        f"outlier_fraction {spec.outlier_fraction!r}",
        f"seed {spec.seed}",
    ]
    path.write_text("\n".join(lines) + "\n")


def read_truth(path) -> dict:
    """Parse a truth sidecar written by the synth subcommand."""
    out: dict = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        key, rest = line.split(" ", 1)
        vals = [float(v) for v in rest.split()]
        out[key] = vals[0] if len(vals) == 1 else vals
    return out


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_register(args) -> int:
    cfg = load_config(args.config).registration
    lr_img = load_y(args.lr)
    hr_img = load_y(args.hr)
    tau0 = AffineTransform.from_scale(args.scale_init)
    result = register(lr_img, hr_img, tau0, cfg)

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    tau = result.tau
    record = [
        f"tau {_fmt_floats(tau.params)}",
        f"alpha {result.lum.alpha!r}",
        f"beta {result.lum.beta!r}",
        f"outer_iters {result.outer_iters_used}",
        f"irls_iters {result.irls_iters_used}",
        f"last_delta_norm {result.last_delta_norm!r}",
        f"residuals {_fmt_floats(result.residual_history)}",
    ]
    (out / "alignment.txt").write_text("\n".join(record) + "\n")
    save_image(out / "aligned.png", result.aligned)
    plots.save_residual_history(result.residual_history, out / "residuals.png")
    for line in record:
        print(line)
    return 0


def _cmd_pyramid(args) -> int:
    img = load_y(args.image)
    pyr = decompose(img)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    print("level,height,width,mean_abs,min,max")
    for name, plane in zip(("s0", "s1", "s2"), pyr.levels):
        write_tensor(out / f"{name}.kpnt", plane)
        print(
            f"{name},{plane.shape[0]},{plane.shape[1]},"
            f"{np.abs(plane).mean():.6f},{plane.min():.6f},{plane.max():.6f}"
        )
    plots.save_pyramid_levels(pyr, out / "pyramid.png")
    return 0


def _cmd_apply(args) -> int:
    img = load_y(args.image)
    pyr = decompose(img)
    tensors = [read_tensor(p) for p in (args.t0, args.t1, args.t2)]
    planes = []
    for level, t in zip(pyr.levels, tensors):
        if t.ndim != 3 or t.shape[1:] != level.shape:
            raise ShapeError(
                f"kernel field {t.shape} does not match pyramid level "
                f"{level.shape}"
            )
        planes.append(apply_kernels(level, t))
    restored = reconstruct(LaplacianPyramid(*planes))
    save_image(args.output, restored)
    print(f"wrote {args.output}")
    return 0


def _cmd_train(args) -> int:
    run_cfg = load_config(args.config)
    data_dir = Path(args.data)
    lr_files = sorted(data_dir.glob("*_lr.png"))
    if not lr_files:
        raise DataIOError(f"no *_lr.png files found in {data_dir}")
    pairs = []
    for lr_path in lr_files:
        hr_path = lr_path.with_name(lr_path.name.replace("_lr.png", "_hr.png"))
        if not hr_path.exists():
            raise DataIOError(f"missing HR counterpart for {lr_path}")
        pairs.append((load_y(lr_path), load_y(hr_path)))

    tc = run_cfg.train
    iters = args.iters if args.iters is not None else tc.iters
    params, losses = train_toy(
        pairs,
        run_cfg.model,
        iters=iters,
        seed=tc.seed,
        batch_size=tc.batch_size,
        lr=tc.lr,
        augment=tc.augment,
    )

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"config": {
        "num_res_blocks": run_cfg.model.num_res_blocks,
        "width": run_cfg.model.width,
        "kernel_size": run_cfg.model.kernel_size,
        "shuffle_factor": run_cfg.model.shuffle_factor,
    }, "layers": []}
    for name in sorted(params):
        fname = name.replace(".", "_") + ".kpnt"
        write_tensor(out / fname, params[name])
        manifest["layers"].append(
            {"name": name, "shape": list(params[name].shape), "file": fname}
        )
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    with open(out / "loss.csv", "w") as fh:
        fh.write("step,loss\n")
        for step, value in enumerate(losses):
            fh.write(f"{step},{value!r}\n")
    plots.save_loss_curve(losses, out / "loss_curve.png")
    print(f"initial_loss,{losses[0]!r}")
    print(f"final_loss,{losses[-1]!r}")
    return 0


def load_weights(weights_dir) -> tuple[dict, dict]:
    """Load a weights directory written by the train subcommand."""
    wdir = Path(weights_dir)
    try:
        manifest = json.loads((wdir / "manifest.json").read_text())
    except FileNotFoundError as exc:
        raise DataIOError(f"no manifest.json in {wdir}") from exc
    except json.JSONDecodeError as exc:
        raise DataIOError(f"malformed manifest.json in {wdir}: {exc}") from exc
    params = {}
    for entry in manifest["layers"]:
        params[entry["name"]] = read_tensor(wdir / entry["file"])
    return params, manifest["config"]


def _cmd_eval(args) -> int:
    paths = args.images
    if len(paths) % 2 != 0:
        raise DataIOError("eval expects an even number of paths: pred gt ...")
    rows = []
    for pred_path, gt_path in zip(paths[0::2], paths[1::2]):
        pred = load_image(pred_path)
        gt = load_image(gt_path)
        if pred.shape != gt.shape:
            raise ShapeError(
                f"{pred_path} and {gt_path} differ in shape: "
                f"{pred.shape} vs {gt.shape}"
            )
        ya = pred if pred.ndim == 2 else rgb_to_y(pred)
        yb = gt if gt.ndim == 2 else rgb_to_y(gt)
        rows.append((str(pred_path), psnr_fn(ya, yb), ssim_fn(ya, yb)))
    lines = ["path,psnr_db,ssim"]
    for name, p, s in rows:
        lines.append(f"{name},{p:.3f},{s:.4f}")
    mean_p = float(np.mean([r[1] for r in rows]))
    mean_s = float(np.mean([r[2] for r in rows]))
    lines.append(f"average,{mean_p:.3f},{mean_s:.4f}")
    for line in lines:
        print(line)
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        (out / "metrics.csv").write_text("\n".join(lines) + "\n")
        plots.save_metric_bars(
            [Path(r[0]).name for r in rows],
            [r[1] for r in rows],
            [r[2] for r in rows],
            out / "metrics.png",
        )
    return 0


def _cmd_synth(args) -> int:
    sc = load_config(args.spec).synth
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    images = checker_and_ramp_corpus(sc.count, sc.size, seed=sc.seed)
    for i, hr_img in enumerate(images):
        tau = make_transform(sc.scale, sc.rotation_deg, sc.tx, sc.ty)
        blur = None
        if sc.blur_sigma > 0:
            blur = np.full(hr_img.shape, sc.blur_sigma)
        spec = DegradationSpec(
            tau_star=tau,
            alpha_star=sc.alpha,
            beta_star=sc.beta,
            blur_sigma_map=blur,
            noise_sigma=sc.noise_sigma,
            outlier_fraction=sc.outlier_fraction,
            seed=sc.seed + i,
        )
        lr_img, truth = degrade(hr_img, spec)
        stem = f"pair_{i:03d}"
        save_image(out / f"{stem}_lr.png", lr_img)
        save_image(out / f"{stem}_hr.png", hr_img)
        _write_truth(out / f"{stem}_truth.txt", truth)
        print(f"{stem},{lr_img.shape[0]}x{lr_img.shape[1]},{sc.size}x{sc.size}")
        if i == 0:
            plots.save_pair_preview(lr_img, hr_img, out / "preview.png")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="zoomsr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("register", help="align an LR image to an HR frame")
    p.add_argument("lr", help="LR image (PNG)")
    p.add_argument("hr", help="HR target image (PNG)")
    p.add_argument("--scale-init", type=float, default=1.0,
                   help="initial magnification, e.g. the focal-length ratio")
    p.add_argument("--config", default=None, help="YAML run configuration")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=_cmd_register)

    p = sub.add_parser("pyramid", help="decompose an image into pyramid levels")
    p.add_argument("image")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=_cmd_pyramid)

    p = sub.add_parser("apply", help="apply per-pixel kernel fields to an image")
    p.add_argument("image")
    p.add_argument("t0", help="kernel container for the finest level")
    p.add_argument("t1", help="kernel container for the middle level")
    p.add_argument("t2", help="kernel container for the base level")
    p.add_argument("-o", "--output", required=True, help="output PNG")
    p.set_defaults(func=_cmd_apply)

    p = sub.add_parser("train", help="train the toy network on patch pairs")
    p.add_argument("--config", default=None, help="YAML run configuration")
    p.add_argument("--data", required=True,
                   help="directory of *_lr.png / *_hr.png pairs")
    p.add_argument("--iters", type=int, default=None,
                   help="override train.iters from the config")
    p.add_argument("-o", "--output", required=True, help="weights directory")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="Y-channel PSNR/SSIM of prediction pairs")
    p.add_argument("images", nargs="+", metavar="pred gt",
                   help="alternating prediction / ground-truth paths")
    p.add_argument("-o", "--output", default=None,
                   help="optional report directory (CSV + figure)")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("synth", help="generate synthetic LR/HR pairs with truth")
    p.add_argument("--spec", default=None, help="YAML run configuration")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ZoomSRError as exc:
        print(f"{exc.prefix}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ERR_IO: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
