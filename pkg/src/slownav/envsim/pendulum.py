"""Torque-limited pendulum with angle measured from the downward rest position."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .walks import make_rng


@dataclass(frozen=True)
class PendulumConfig:
    """θ̈ = −k·sin θ − damping·θ̇ + τ with |τ| ≤ tau_max, semi-implicit Euler step dt.

    Angular velocity is in radians per unit time.
    """

    k: float = 1.0
    dt: float = 0.05
    tau_max: float = 0.4
    damping: float = 0.0

    def __post_init__(self):
        if not (self.k > 0 and self.dt > 0 and self.tau_max > 0 and self.damping >= 0):
            raise ValueError("invalid pendulum configuration")


def wrap_angle(theta):
    """Map angles into (−π, π]."""
    return math.pi - np.mod(math.pi - np.asarray(theta, dtype=float), 2 * math.pi)


def pendulum_step(state, torque: float, cfg: PendulumConfig = PendulumConfig()) -> np.ndarray:
    """Advance ``state = (angle, velocity)`` by one step with clamped torque."""
    theta, omega = float(state[0]), float(state[1])
    tau = min(max(float(torque), -cfg.tau_max), cfg.tau_max)
    omega = omega + cfg.dt * (-cfg.k * math.sin(theta) - cfg.damping * omega + tau)
    theta = float(wrap_angle(theta + cfg.dt * omega))
    return np.array([theta, omega])


def pendulum_energy(state, cfg: PendulumConfig = PendulumConfig()):
    """½ω² + k(1 − cos θ): zero at rest, 2k at rest upright."""
    s = np.asarray(state, dtype=float)
    return 0.5 * s[..., 1] ** 2 + cfg.k * (1 - np.cos(s[..., 0]))


def upright_energy(cfg: PendulumConfig = PendulumConfig()) -> float:
    return 2.0 * cfg.k


def phase_sensor(state) -> np.ndarray:
    """Sensor reading (velocity, amplitude)."""
    s = np.asarray(state, dtype=float)
    return s[..., ::-1].copy()


def pendulum_random_walk(cfg: PendulumConfig = PendulumConfig(), steps: int = 10000,
                         seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Random torques from downward rest.

    Returns
    -------
    phase : ndarray, shape (steps, 2)
        (velocity, amplitude) before each torque is applied.
    torques : ndarray, shape (steps, 1)
    """
    torques = make_rng(seed).uniform(-cfg.tau_max, cfg.tau_max, steps)
    state = np.zeros(2)
    phase = np.empty((steps, 2))
    for t in range(steps):
        phase[t] = phase_sensor(state)
        state = pendulum_step(state, torques[t], cfg)
    return phase, torques[:, None]
