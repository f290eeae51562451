"""Matplotlib report figures rendered to files next to the text outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_residual_history(history, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.arange(len(history)), history, "o-", color="tab:blue")
    ax.set_xlabel("outer iteration")
    ax.set_ylabel("robust objective")
    ax.set_yscale("log")
    ax.set_title("Registration residual history")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_loss_curve(losses, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.arange(len(losses)), losses, color="tab:orange")
    ax.set_xlabel("step")
    ax.set_ylabel("L2 loss")
    ax.set_yscale("log")
    ax.set_title("Training loss")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_pyramid_levels(pyr, path) -> None:
    fig, axes = plt.subplots(1, 3, figsize=(10, 4))
    for ax, plane, name in zip(axes, pyr.levels, ("s0", "s1", "s2")):
        im = ax.imshow(plane, cmap="gray")
        ax.set_title(f"{name} {plane.shape[0]}x{plane.shape[1]}")
        ax.axis("off")
        fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_metric_bars(names, psnrs, ssims, path) -> None:
    x = np.arange(len(names))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.bar(x, psnrs, color="tab:blue")
    ax1.set_ylabel("PSNR (dB)")
    ax2.bar(x, ssims, color="tab:green")
    ax2.set_ylabel("SSIM")
    for ax in (ax1, ax2):
        ax.set_xticks(x)
        ax.set_xticklabels(names, rotation=45, ha="right", fontsize=7)
        ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_pair_preview(lr_img, hr_img, path) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 4))
    ax1.imshow(lr_img, cmap="gray", vmin=0, vmax=255)
    ax1.set_title(f"LR {lr_img.shape[0]}x{lr_img.shape[1]}")
    ax2.imshow(hr_img, cmap="gray", vmin=0, vmax=255)
    ax2.set_title(f"HR {hr_img.shape[0]}x{hr_img.shape[1]}")
    for ax in (ax1, ax2):
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
