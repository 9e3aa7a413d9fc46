"""Exploration walks used as training data.

All randomness comes from ``numpy.random.Generator(PCG64(seed))``, whose
stream is stable across platforms and numpy versions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import Environment2D, move


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class RandomWalkConfig:
    steps: int
    step_size: float = 0.02
    seed: int = 0
    start: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")


def random_walk(env: Environment2D, cfg: RandomWalkConfig) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-length steps in uniformly random directions, cut off at walls.

    Returns
    -------
    positions : ndarray, shape (steps, 2)
        Achieved states; ``positions[0]`` is the start.
    controls : ndarray, shape (steps, 2)
        Intended displacements; ``controls[t]`` moves ``positions[t]`` to
        ``positions[t + 1]``.
    """
    start = env.start if cfg.start is None else cfg.start
    pos = env.require_interior(start, "start")
    rng = make_rng(cfg.seed)
    theta = rng.uniform(0.0, 2 * math.pi, cfg.steps)
    controls = cfg.step_size * np.column_stack([np.cos(theta), np.sin(theta)])
    positions = np.empty((cfg.steps, 2))
    for t in range(cfg.steps):
        positions[t] = pos
        pos = move(env, pos, controls[t])
    return positions, controls


@dataclass(frozen=True)
class RepellerWalkConfig:
    """1-D walk on [a, b] pushed away from the midpoint by a Gaussian repeller.

    Each step is uniform on [−δ + η(x), δ + η(x)] with
    η(x) = sign(x − μ)·τ/√(2πσ²)·exp(−(x − μ)²/(2σ²)), μ = (a + b)/2,
    and the result is clipped to [a, b]. τ = 0 gives the plain uniform walk.
    """

    steps: int
    a: float = 0.0
    b: float = 100.0
    delta: float = 0.5
    tau: float = 0.0
    sigma: float = 5.0
    seed: int = 0
    start: Optional[float] = None

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("interval needs a < b")
        if not (self.delta > 0 and self.sigma > 0 and self.tau >= 0):
            raise ValueError("delta and sigma must be positive, tau non-negative")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")

    @property
    def mu(self) -> float:
        return 0.5 * (self.a + self.b)


def repeller_push(x, cfg: RepellerWalkConfig):
    """η(x); zero exactly at the midpoint."""
    d = np.asarray(x, dtype=float) - cfg.mu
    amp = cfg.tau / math.sqrt(2 * math.pi * cfg.sigma ** 2)
    return np.sign(d) * amp * np.exp(-d ** 2 / (2 * cfg.sigma ** 2))


def bottleneck_walk_1d(cfg: RepellerWalkConfig) -> np.ndarray:
    """Positions of the repeller walk, shape (steps, 1)."""
    x = cfg.mu + cfg.sigma if cfg.start is None else float(cfg.start)
    if not cfg.a <= x <= cfg.b:
        raise ValueError("start outside the interval")
    noise = make_rng(cfg.seed).uniform(-cfg.delta, cfg.delta, cfg.steps).tolist()
    amp = cfg.tau / math.sqrt(2 * math.pi * cfg.sigma ** 2)
    two_s2 = 2 * cfg.sigma ** 2
    mu, a, b = cfg.mu, cfg.a, cfg.b
    out = [0.0] * cfg.steps
    for t in range(cfg.steps):
        out[t] = x
        d = x - mu
        eta = 0.0 if d == 0.0 or amp == 0.0 else math.copysign(amp * math.exp(-d * d / two_s2), d)
        x = min(max(x + eta + noise[t], a), b)
    return np.asarray(out)[:, None]


def interval_walk_1d(steps: int, length: float = 100.0, step: float = 0.5,
                     seed: int = 0, start: Optional[float] = None) -> np.ndarray:
    """Uniform steps on [−step, step] within [0, length], cut off at the ends."""
    cfg = RepellerWalkConfig(steps, 0.0, length, step, 0.0, 1.0, seed,
                             length / 2 if start is None else start)
    return bottleneck_walk_1d(cfg)


def mean_reverting_walk_1d(steps: int, rho: float = 0.9, seed: int = 0) -> np.ndarray:
    """Gaussian AR(1) walk x ← ρx + √(1 − ρ²)·ε with standard normal stationary law."""
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    eps = make_rng(seed).standard_normal(steps)
    gain = math.sqrt(1 - rho * rho)
    out = np.empty(steps)
    x = 0.0
    for t, e in enumerate(eps.tolist()):
        out[t] = x
        x = rho * x + gain * e
    return out[:, None]
