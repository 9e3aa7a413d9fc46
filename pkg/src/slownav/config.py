"""Experiment configuration files (YAML).

Schema (every key optional; missing keys take the defaults below)::

    schema_version: 1
    experiment: two-rooms        # canned experiment name, or null
    preset: two_rooms            # environment preset
    sensor: wall                 # wall | cartesian
    walk:       {steps: 200000, step_size: 0.02, seed: 0}
    expansion:  {basis: monomial, degree: null}   # null: per-preset default
    model:      {p: 1, q: 1, r: 8, R: 3, k: 0, full_pfax: false}
    navigation: {theta: null, theta_fraction: 0.05, theta_tilde: null,
                 speed: null, max_steps_total: 2000,
                 max_steps_per_phase: 1000, progress_window: 20}
    params: {}                   # experiment-specific extras
    out: results

``theta: null`` derives θ from ``theta_fraction`` of the RMS feature distance;
``speed: null`` uses the walk step size.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Optional

import yaml

from .envsim.presets import PRESETS

SCHEMA_VERSION = 1

#: Expansion degree used when a config leaves it open.
DEFAULT_DEGREES = {
    "single_room": 4,
    "two_rooms": 5,
    "three_rooms": 2,
    "four_rooms": 2,
    "three_rooms_corridor": 2,
    "obstacle": 4,
}


class ConfigError(ValueError):
    """Invalid configuration content."""


@dataclass(frozen=True)
class WalkSettings:
    steps: int = 200_000
    step_size: float = 0.02
    seed: int = 0


@dataclass(frozen=True)
class ExpansionSettings:
    basis: str = "monomial"
    degree: Optional[int] = None


@dataclass(frozen=True)
class ModelSettings:
    p: int = 1
    q: int = 1
    r: int = 8
    R: int = 3
    k: int = 0
    full_pfax: bool = False


@dataclass(frozen=True)
class NavigationSettings:
    theta: Optional[float] = None
    theta_fraction: float = 0.05
    theta_tilde: Optional[float] = None
    speed: Optional[float] = None
    max_steps_total: int = 2000
    max_steps_per_phase: int = 1000
    progress_window: int = 20


@dataclass(frozen=True)
class ExperimentConfig:
    schema_version: int = SCHEMA_VERSION
    experiment: Optional[str] = None
    preset: Optional[str] = "two_rooms"
    sensor: str = "wall"
    walk: WalkSettings = WalkSettings()
    expansion: ExpansionSettings = ExpansionSettings()
    model: ModelSettings = ModelSettings()
    navigation: NavigationSettings = NavigationSettings()
    params: dict = field(default_factory=dict)
    out: str = "results"

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {self.schema_version}")
        if self.preset is not None and self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}; valid: {', '.join(PRESETS)}")
        if self.sensor not in ("wall", "cartesian"):
            raise ConfigError(f"unknown sensor {self.sensor!r}")
        if self.expansion.basis not in ("monomial", "legendre"):
            raise ConfigError(f"unknown basis {self.expansion.basis!r}")
        if self.expansion.degree is not None and self.expansion.degree < 1:
            raise ConfigError("expansion degree must be positive")
        if self.walk.steps < 3 or not self.walk.step_size > 0:
            raise ConfigError("walk needs at least 3 steps and a positive step size")
        m = self.model
        if min(m.p, m.q, m.r, m.R) < 1 or m.k < 0 or m.R > m.r:
            raise ConfigError("model orders must be positive with R <= r")

    @property
    def degree(self) -> int:
        if self.expansion.degree is not None:
            return self.expansion.degree
        return DEFAULT_DEGREES.get(self.preset, 2)

    @property
    def speed(self) -> float:
        return self.navigation.speed or self.walk.step_size

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return dataclasses.replace(self, walk=dataclasses.replace(self.walk, seed=int(seed)))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_SECTIONS = {
    "walk": WalkSettings,
    "expansion": ExpansionSettings,
    "model": ModelSettings,
    "navigation": NavigationSettings,
}


def _build(cls, data: Any, where: str):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected a mapping")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def config_from_dict(data: Optional[dict]) -> ExperimentConfig:
    data = dict(data or {})
    for key, cls in _SECTIONS.items():
        data[key] = _build(cls, data.get(key), key)
    if data.get("params") is None:
        data["params"] = {}
    return _build(ExperimentConfig, data, "config")


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return config_from_dict(data)


def dump_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True)
