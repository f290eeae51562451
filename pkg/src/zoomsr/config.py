"""Run configuration: a small nested YAML file, strictly validated.

Unknown sections or keys are rejected so that typos fail loudly instead
of silently running with defaults. Every value is type- and range-checked
by the owning dataclass.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

import yaml

from .errors import ConfigError, InvalidParameterError
from .nn import ModelConfig
from .registration import RegistrationConfig


@dataclass(frozen=True)
class TrainConfig:
    iters: int = 2000
    batch_size: int = 4
    lr: float = 1e-4
    seed: int = 0
    augment: bool = False

    def __post_init__(self):
        if self.iters < 0:
            raise InvalidParameterError("iters must be >= 0")
        if self.batch_size < 1:
            raise InvalidParameterError("batch_size must be >= 1")
        if self.lr <= 0:
            raise InvalidParameterError("lr must be positive")


@dataclass(frozen=True)
class MetricsConfig:
    shave_border: int = 0

    def __post_init__(self):
        if self.shave_border < 0:
            raise InvalidParameterError("shave_border must be >= 0")


@dataclass(frozen=True)
class SynthConfig:
    count: int = 4
    size: int = 192
    scale: float = 2.1
    rotation_deg: float = 0.3
    tx: float = 1.0
    ty: float = -0.5
    alpha: float = 1.2
    beta: float = -8.0
    blur_sigma: float = 0.0
    noise_sigma: float = 0.0
    outlier_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.count < 0:
            raise InvalidParameterError("count must be >= 0")
        if self.size < 32:
            raise InvalidParameterError("size must be >= 32")
        if self.scale <= 0:
            raise InvalidParameterError("scale must be positive")
        if self.blur_sigma < 0 or self.noise_sigma < 0:
            raise InvalidParameterError("sigmas must be non-negative")
        if not (0.0 <= self.outlier_fraction <= 0.5):
            raise InvalidParameterError("outlier_fraction must lie in [0, 0.5]")


@dataclass(frozen=True)
class RunConfig:
    registration: RegistrationConfig = RegistrationConfig()
    model: ModelConfig = ModelConfig()
    train: TrainConfig = TrainConfig()
    metrics: MetricsConfig = MetricsConfig()
    synth: SynthConfig = SynthConfig()


_SECTIONS = {
    "registration": RegistrationConfig,
    "model": ModelConfig,
    "train": TrainConfig,
    "metrics": MetricsConfig,
    "synth": SynthConfig,
}


def _build_section(name: str, cls, values: dict):
    allowed = {f.name: f.type for f in fields(cls)}
    unknown = set(values) - set(allowed)
    if unknown:
        raise ConfigError(
            f"unknown key(s) in section '{name}': {', '.join(sorted(unknown))}"
        )
    coerced = {}
    for key, val in values.items():
        want = allowed[key]
        if want == "bool" or want is bool:
            if not isinstance(val, bool):
                raise ConfigError(f"{name}.{key} must be a boolean, got {val!r}")
        elif want == "int" or want is int:
            if isinstance(val, bool) or not isinstance(val, int):
                raise ConfigError(f"{name}.{key} must be an integer, got {val!r}")
        elif want == "float" or want is float:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"{name}.{key} must be a number, got {val!r}")
            val = float(val)
        coerced[key] = val
    try:
        return cls(**coerced)
    except InvalidParameterError as exc:
        raise ConfigError(f"section '{name}': {exc}") from exc


def load_config(path=None) -> RunConfig:
    """Load a YAML run configuration; `None` returns all defaults."""
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text()
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {path} ({exc})") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}") from exc
    if raw is None:
        return RunConfig()
    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be a mapping, got {type(raw).__name__}")
    unknown = set(raw) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    sections = {}
    for name, cls in _SECTIONS.items():
        values = raw.get(name, {})
        if values is None:
            values = {}
        if not isinstance(values, dict):
            raise ConfigError(f"section '{name}' must be a mapping")
        sections[name] = _build_section(name, cls, values)
    return RunConfig(**sections)
