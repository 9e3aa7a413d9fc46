"""Global navigation by sweeping over slow features.

The agent greedily moves toward the goal in feature space, using a growing
prefix of the slow components. When progress stalls it first adds further
components (to escape flat regions), then tries single components one at a
time (to escape the wrong connected piece of a level set), and restarts the
sweep after any significant gain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Protocol

import numpy as np

from .control import assemble_control_problem, solve_norm_constrained
from .envsim.geometry import Environment2D, move
from .envsim.pendulum import PendulumConfig, pendulum_step, phase_sensor
from .envsim.sensor import wall_sensor_batch
from .pfax import PfaxModel
from .sfa import SfaModel, sfa_extract

PHASE_SWEEP = "sweep"
PHASE_FLAT = "flat-area"
PHASE_DISCONNECTED = "disconnected"
PHASE_DONE = "done"
PHASE_FAILURE = "failure"
PHASE_BUDGET = "budget"


class Plant(Protocol):
    """What the navigator needs from a controllable system."""

    def sense(self, state) -> np.ndarray: ...

    def step(self, state, control) -> np.ndarray: ...


@dataclass(frozen=True)
class RoomPlant:
    """Agent in a polygonal environment seen through the wall sensor.

    ``channels`` selects sensor components; by default the last wall is
    dropped since the fractions sum to one.
    """

    env: Environment2D
    sensor: str = "wall"
    drop_last: bool = True

    def sense_batch(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.sensor == "cartesian":
            return pts.copy()
        s = wall_sensor_batch(self.env, pts)
        return s[:, :-1] if self.drop_last else s

    def sense(self, state) -> np.ndarray:
        return self.sense_batch(state)[0]

    def step(self, state, control) -> np.ndarray:
        return move(self.env, np.asarray(state, dtype=float), np.asarray(control, dtype=float))

    def start_state(self, start) -> np.ndarray:
        return self.env.require_interior(start, "start")


@dataclass(frozen=True)
class IntervalPlant:
    """1-D agent on [a, b] sensing its own position; moves are cut off at the ends."""

    a: float = 0.0
    b: float = 100.0

    def sense(self, state) -> np.ndarray:
        return np.atleast_1d(np.asarray(state, dtype=float)).copy()

    def sense_batch(self, pts) -> np.ndarray:
        return np.asarray(pts, dtype=float).reshape(-1, 1)

    def step(self, state, control) -> np.ndarray:
        x = float(np.asarray(state).reshape(-1)[0]) + float(np.asarray(control).reshape(-1)[0])
        return np.array([min(max(x, self.a), self.b)])

    def start_state(self, start) -> np.ndarray:
        x = float(np.asarray(start).reshape(-1)[0])
        if not self.a <= x <= self.b:
            raise ValueError(f"start {x} outside [{self.a}, {self.b}]")
        return np.array([x])


@dataclass(frozen=True)
class PendulumPlant:
    """Pendulum state (angle, velocity) sensed as (velocity, amplitude)."""

    cfg: PendulumConfig = PendulumConfig()

    def sense(self, state) -> np.ndarray:
        return phase_sensor(state)

    def sense_batch(self, states) -> np.ndarray:
        return phase_sensor(np.atleast_2d(states))

    def step(self, state, control) -> np.ndarray:
        return pendulum_step(state, float(np.asarray(control).reshape(-1)[0]), self.cfg)

    def start_state(self, start) -> np.ndarray:
        return np.asarray(start, dtype=float).reshape(2).copy()


@dataclass(frozen=True)
class Models:
    """Slow features plus the predictor of their response to control."""

    sfa: SfaModel
    pfax: PfaxModel

    def features(self, raw) -> np.ndarray:
        """Features of a batch (2-D input) or of a single sensor state (1-D input)."""
        return _extract(self.sfa, raw)


def _extract(sfa: SfaModel, raw) -> np.ndarray:
    x = np.asarray(raw, dtype=float)
    if x.ndim == 1 and x.size == sfa.input_dim:
        return sfa_extract(sfa, x.reshape(1, -1))[0]
    return sfa_extract(sfa, x)


@dataclass(frozen=True)
class NavigationConfig:
    """Parameters of the sweep.

    ``theta`` bounds the squared feature distance for termination;
    ``theta_tilde`` is the least reduction of the active distance over
    ``progress_window`` steps that counts as progress. ``max_restarts`` of
    ``None`` allows ``ceil(D_0 / theta_tilde)`` restarts, D_0 being the initial
    squared distance over all R components.
    """

    theta: float
    theta_tilde: Optional[float] = None
    R: int = 3
    speed: float = 0.02
    max_steps_total: int = 2000
    max_steps_per_phase: int = 1000
    progress_window: int = 20
    max_restarts: Optional[int] = None

    def __post_init__(self):
        if not self.theta >= 0:
            raise ValueError("theta must be non-negative")
        if self.theta_tilde is not None and not self.theta_tilde > 0:
            raise ValueError("theta_tilde must be positive")
        if self.R < 1 or self.progress_window < 1 or self.max_steps_per_phase < 1:
            raise ValueError("R and window sizes must be at least 1")
        if not self.speed > 0:
            raise ValueError("speed must be positive")

    @property
    def tilde(self) -> float:
        if self.theta_tilde is not None:
            return self.theta_tilde
        return self.theta / 10 if self.theta > 0 else 1e-12


@dataclass(frozen=True)
class FeatureGoal:
    g_star: np.ndarray
    source: Optional[np.ndarray] = None

    def __post_init__(self):
        if not np.all(np.isfinite(self.g_star)):
            raise ValueError("goal features must be finite")


def goal_in_feature_space(sfa: SfaModel, x_star, R: Optional[int] = None) -> FeatureGoal:
    """Goal features of a raw sensor state (first R components)."""
    x_star = np.asarray(x_star, dtype=float)
    g = np.atleast_1d(_extract(sfa, x_star))
    if g.ndim != 1:
        raise ValueError("goal must be a single sensor state")
    if R is not None:
        g = g[:R]
    return FeatureGoal(g.copy(), x_star.copy())


@dataclass
class NavigationTrace:
    """Per-step record of an episode; row 0 is the start state.

    ``active`` is the number of components in the minimized sum (or the single
    component index, 1-based, in disconnected-level-set passes); ``distance``
    is the squared feature distance over all R components.
    """

    states: list = field(default_factory=list)
    features: list = field(default_factory=list)
    active: list = field(default_factory=list)
    controls: list = field(default_factory=list)
    distance: list = field(default_factory=list)
    phase: list = field(default_factory=list)
    restarts: int = 0
    outcome: str = ""

    @property
    def n_steps(self) -> int:
        return len(self.states) - 1

    @property
    def success(self) -> bool:
        return self.outcome == PHASE_DONE

    def record(self, state, feats, active, control, dist, phase):
        self.states.append(np.array(state, dtype=float))
        self.features.append(np.array(feats, dtype=float))
        self.active.append(int(active))
        self.controls.append(np.array(control, dtype=float))
        self.distance.append(float(dist))
        self.phase.append(phase)

    def to_csv(self, path) -> None:
        """Write ``step,x,y,j,ux,uy,dist,phase`` rows (y, uy empty for 1-D)."""
        with open(path, "w") as fh:
            fh.write("step,x,y,j,ux,uy,dist,phase\n")
            for i, (s, a, u, d, ph) in enumerate(zip(self.states, self.active, self.controls,
                                                     self.distance, self.phase)):
                s = np.atleast_1d(s)
                u = np.atleast_1d(u)
                y = repr(float(s[1])) if s.size > 1 else ""
                uy = repr(float(u[1])) if u.size > 1 else ""
                fh.write(f"{i},{float(s[0])!r},{y},{a},{float(u[0])!r},{uy},{d!r},{ph}\n")


class _Episode:
    """Mutable navigation state shared by the phases of one episode."""

    def __init__(self, models: Models, plant, state, goal: FeatureGoal,
                 cfg: NavigationConfig):
        self.models = models
        self.plant = plant
        self.cfg = cfg
        self.goal = np.asarray(goal.g_star, dtype=float)
        if self.goal.shape[0] < cfg.R:
            raise ValueError(f"goal has {self.goal.shape[0]} components, R = {cfg.R}")
        if models.pfax.r < cfg.R:
            raise ValueError(f"models provide {models.pfax.r} components, R = {cfg.R}")
        if not models.pfax.proxy_mode:
            raise ValueError("navigation needs a predictor fitted to the SFA features")
        self.r = models.pfax.r
        self.n_u = models.pfax.n_u
        self.state = state
        self.feats = models.features(plant.sense(state))
        self.m_hist = [self.feats] * models.pfax.p
        self.u_hist = [np.zeros(self.n_u)] * max(models.pfax.q - 1, 0)
        self.steps = 0
        self.trace = NavigationTrace()
        self.trace.record(state, self.feats[: cfg.R], 0, np.zeros(self.n_u),
                          self.dist(range(cfg.R)), PHASE_SWEEP)

    def dist(self, comps) -> float:
        idx = list(comps)
        d = self.feats[idx] - self.goal[idx]
        return float(d @ d)

    def control(self, comps) -> np.ndarray:
        idx = list(comps)
        a_sfa = np.eye(self.r)[:, idx]
        problem = assemble_control_problem(
            self.models.pfax, a_sfa, self.goal[idx], np.concatenate(self.m_hist),
            np.concatenate(self.u_hist) if self.u_hist else None,
            norm_c=self.cfg.speed, projected=True)
        return solve_norm_constrained(problem)

    def step(self, comps, active: int, phase: str) -> None:
        u = self.control(comps)
        self.state = self.plant.step(self.state, u)
        self.feats = self.models.features(self.plant.sense(self.state))
        self.m_hist = [self.feats] + self.m_hist[:-1]
        if self.u_hist:
            self.u_hist = [u] + self.u_hist[:-1]
        self.steps += 1
        self.trace.record(self.state, self.feats[: self.cfg.R], active, u,
                          self.dist(range(self.cfg.R)), phase)

    def minimize(self, comps, active: int, phase: str) -> str:
        """Greedy descent on the given components.

        Returns "reached" (distance ≤ θ), "stuck" (no reduction > θ̃ over the
        progress window, or phase cap hit) or "budget".
        """
        comps = list(comps)
        history = [self.dist(comps)]
        window = self.cfg.progress_window
        while history[-1] > self.cfg.theta:
            if self.steps >= self.cfg.max_steps_total:
                return "budget"
            if len(history) > self.cfg.max_steps_per_phase:
                return "stuck"
            self.step(comps, active, phase)
            history.append(self.dist(comps))
            if len(history) > window and history[-window - 1] - history[-1] <= self.cfg.tilde:
                return "stuck"
        return "reached"


def navigate(models: Models, plant, start, goal: FeatureGoal,
             cfg: NavigationConfig) -> NavigationTrace:
    """Drive ``plant`` from ``start`` toward ``goal``.

    The sweep minimizes Σ_{i≤j}(g_i − g_i*)² for j = 1..R in turn. On a stall
    at level j, the flat-area stage minimizes the sums up to k = j+1..R; if one
    of them reaches θ the sweep restarts at j = 1. Otherwise each component
    i = j..R is minimized alone, and a reduction of more than θ̃ restarts the
    sweep. If none helps the episode fails. Every phase is capped by
    ``max_steps_per_phase`` and the episode by ``max_steps_total``.
    """
    ep = _Episode(models, plant, plant.start_state(start), goal, cfg)
    R = cfg.R
    restart_cap = cfg.max_restarts
    if restart_cap is None:
        restart_cap = max(1, math.ceil(ep.dist(range(R)) / cfg.tilde))

    def finish(outcome: str) -> NavigationTrace:
        ep.trace.outcome = outcome
        ep.trace.phase[-1] = outcome
        return ep.trace

    while True:
        stalled_at = None
        for j in range(1, R + 1):
            res = ep.minimize(range(j), j, PHASE_SWEEP)
            if res == "budget":
                return finish(PHASE_BUDGET)
            if res == "stuck":
                stalled_at = j
                break
        if stalled_at is None:
            return finish(PHASE_DONE)

        j = stalled_at
        resolved = False
        for k in range(j + 1, R + 1):
            res = ep.minimize(range(k), k, PHASE_FLAT)
            if res == "budget":
                return finish(PHASE_BUDGET)
            if res == "reached":
                resolved = True
                break
        if not resolved:
            for i in range(j - 1, R):
                before = ep.dist([i])
                res = ep.minimize([i], i + 1, PHASE_DISCONNECTED)
                if res == "budget":
                    return finish(PHASE_BUDGET)
                if before - ep.dist([i]) > cfg.tilde:
                    resolved = True
                    break
        if not resolved:
            return finish(PHASE_FAILURE)
        ep.trace.restarts += 1
        if ep.trace.restarts > restart_cap:
            return finish(PHASE_FAILURE)


def sweep_step(models: Models, plant, state, goal: FeatureGoal, comps, c: float):
    """One greedy norm-constrained step on the components ``comps``.

    Uses the current features as the whole history (orders beyond one see
    repeated features and zero past controls). Returns the control, the new
    state and its features.
    """
    cfg = NavigationConfig(theta=0.0, R=max(comps) + 1, speed=c)
    ep = _Episode(models, plant, np.asarray(state, dtype=float), goal, cfg)
    comps = list(comps)
    ep.step(comps, len(comps), PHASE_SWEEP)
    return ep.trace.controls[-1], ep.state, ep.feats


def default_theta(models: Models, plant, samples, R: int, fraction: float = 0.05,
                  n_pairs: int = 20000, seed: int = 0) -> float:
    """``fraction`` of the RMS feature distance (first R components) between
    random pairs of the given sample states."""
    feats = models.features(plant.sense_batch(samples))[:, :R]
    rng = np.random.Generator(np.random.PCG64(seed))
    i = rng.integers(0, feats.shape[0], n_pairs)
    k = rng.integers(0, feats.shape[0], n_pairs)
    d2 = np.sum((feats[i] - feats[k]) ** 2, axis=1)
    return float((fraction * math.sqrt(d2.mean())) ** 2)


def flow_field(models: Models, plant, goal: FeatureGoal, cfg: NavigationConfig,
               points, mask=None, n_steps: int = 5) -> np.ndarray:
    """Net displacement after ``n_steps`` navigation steps from each point.

    Rows for masked-out points are NaN.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    mask = np.ones(points.shape[0], dtype=bool) if mask is None else np.asarray(mask)
    out = np.full_like(points, np.nan)
    short = NavigationConfig(theta=cfg.theta, theta_tilde=cfg.theta_tilde, R=cfg.R,
                             speed=cfg.speed, max_steps_total=n_steps,
                             max_steps_per_phase=cfg.max_steps_per_phase,
                             progress_window=cfg.progress_window,
                             max_restarts=cfg.max_restarts)
    for idx in np.flatnonzero(mask):
        trace = navigate(models, plant, points[idx], goal, short)
        out[idx] = trace.states[-1] - trace.states[0]
    return out
