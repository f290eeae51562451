"""Thin-lens magnification model.

Provides the scale prior used to initialize registration of a zoom pair:
the magnification between two shots of the same scene is the ratio of
their focal lengths.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidParameterError


@dataclass(frozen=True)
class LensConfig:
    """Thin-lens setup: focal length, object distance and object size (mm)."""

    focal_length: float
    object_distance: float
    object_size: float

    def __post_init__(self):
        if not self.focal_length > 0:
            raise InvalidParameterError("focal_length must be positive")
        if not self.object_distance > self.focal_length:
            raise InvalidParameterError(
                "object_distance must exceed focal_length for a real image"
            )
        if self.object_size < 0:
            raise InvalidParameterError("object_size must be non-negative")


def image_distance(cfg: LensConfig) -> float:
    """Image-side distance v = f*u / (u - f). Exposed for documentation."""
    f, u = cfg.focal_length, cfg.object_distance
    return f * u / (u - f)


def magnification(cfg: LensConfig) -> float:
    """Magnification M = v / u."""
    return image_distance(cfg) / cfg.object_distance


def image_size(cfg: LensConfig) -> tuple[float, float]:
    """Size of the image of the object on the sensor, in millimeters.

    Returns (exact, approx): the exact thin-lens value f*h1/(u-f) and the
    far-field approximation (f/u)*h1 that becomes tight for u >> f.
    """
    f, u, h1 = cfg.focal_length, cfg.object_distance, cfg.object_size
    exact = f * h1 / (u - f)
    approx = f / u * h1
    return exact, approx


def initial_scale(f_hr: float, f_lr: float) -> float:
    """Magnification ratio between two focal lengths, f_hr / f_lr.

    Used to seed the registration warp as a pure scaling. The exact ratio
    is always used; nominal zoom labels (e.g. a 105/50 mm pair sold as x2)
    are metadata only.
    """
    if f_hr <= 0 or f_lr <= 0:
        raise InvalidParameterError("focal lengths must be positive")
    return f_hr / f_lr
