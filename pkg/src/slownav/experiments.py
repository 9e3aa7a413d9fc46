"""Canned experiments.

Each experiment trains its models from a seeded exploration, evaluates them,
and writes CSV files, model bundles, optional figures and ``metrics.json``
into an output directory. ``metrics.json`` depends only on the config, so
re-running an experiment reproduces it byte for byte; wall-clock timings go
to the separate ``timing.json``.
"""
from __future__ import annotations

import dataclasses
import json
import math
import os
import time
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy import stats

from .bundle import ModelBundle, make_provenance, save_bundle
from .config import ExperimentConfig, config_from_dict, dump_config
from .envsim import (MOST_DISTANT_ROOMS, PendulumConfig, RandomWalkConfig, RepellerWalkConfig,
                     bottleneck_walk_1d, interval_walk_1d, make_preset, mean_reverting_walk_1d,
                     pendulum_energy, pendulum_random_walk, random_walk, segments_csv,
                     upright_energy)
from .navigator import (Models, NavigationConfig, PendulumPlant, RoomPlant,
                        default_theta, flow_field, goal_in_feature_space, navigate)
from .numeric import ExpansionSpec, write_table_csv
from .pfax import stationarity_residuals
from .pipeline import TrainingRun, run_training
from .plotting import (plot_curves, plot_feature_grid, plot_flow, plot_histogram, plot_phase,
                       plot_traces)
from .sfa import HarmonicReference, chebyshev_compose, constraint_report, harmonic_eval, sfa_extract

METRICS_FILE = "metrics.json"
TIMING_FILE = "timing.json"
THETA_LATTICE = 30


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------

def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def write_json(path, data) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps(_plain(data), sort_keys=True, indent=2) + "\n")


def bundle_checks(run: TrainingRun) -> dict:
    """Constraint statistics of the training features and predictor residuals."""
    rep = constraint_report(run.features)
    a = run.models.sfa.extraction
    rel_b, rel_u = stationarity_residuals(run.models.pfax, run.embedding)
    return {
        **rep,
        "orthonormality_error": float(np.linalg.norm(a.T @ a - np.eye(a.shape[1]))),
        "stationarity_B": rel_b,
        "stationarity_U": rel_u,
    }


class _Context:
    """Output directory, config and timing bookkeeping for one run."""

    def __init__(self, name: str, cfg: ExperimentConfig, out: Path, figures: bool):
        self.name = name
        self.cfg = cfg
        self.out = out
        self.figures = figures
        self.bundles: dict = {}
        self.timing: dict = {}
        out.mkdir(parents=True, exist_ok=True)

    def path(self, fname: str) -> Path:
        return self.out / fname

    def timed(self, label: str, fn: Callable, *args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        self.timing[label] = self.timing.get(label, 0.0) + time.perf_counter() - t0
        return res

    def train(self, tag: str, raw, controls, plant: dict, *, basis=None, degree=None,
              r=None, expansion: Optional[ExpansionSpec] = None) -> TrainingRun:
        c = self.cfg
        run = self.timed("train", run_training, raw, controls,
                         basis or c.expansion.basis, degree or c.degree, r or c.model.r,
                         c.model.p, c.model.q, full_pfax=c.model.full_pfax,
                         expansion=expansion)
        self.bundles[tag] = bundle_checks(run)
        bundle = ModelBundle(run.models, plant, make_provenance(c.to_dict(), c.walk.seed))
        save_bundle(bundle, self.path(f"{tag}.bundle"))
        return run

    def figure(self, fn: Callable, *args, **kwargs) -> None:
        if self.figures:
            fn(*args, **kwargs)


def _nav_config(cfg: ExperimentConfig, theta: float, R: Optional[int] = None,
                speed: Optional[float] = None) -> NavigationConfig:
    n = cfg.navigation
    return NavigationConfig(theta=theta, theta_tilde=n.theta_tilde, R=R or cfg.model.R,
                            speed=speed or cfg.speed, max_steps_total=n.max_steps_total,
                            max_steps_per_phase=n.max_steps_per_phase,
                            progress_window=n.progress_window)


def _theta(cfg: ExperimentConfig, models: Models, plant, samples, R: int) -> float:
    if cfg.navigation.theta is not None:
        return float(cfg.navigation.theta)
    return default_theta(models, plant, samples, R, cfg.navigation.theta_fraction)


def _spearman(a, b) -> float:
    return float(stats.spearmanr(a, b)[0])


def _abs_corr(a, b) -> float:
    return float(abs(np.corrcoef(a, b)[0, 1]))


def _room_setup(ctx: _Context, preset: str, tag: Optional[str] = None):
    """Explore ``preset``, train, and return (env, plant, run, theta samples)."""
    cfg = ctx.cfg
    env = make_preset(preset)
    plant = RoomPlant(env, cfg.sensor)
    pos, u = ctx.timed("explore", random_walk, env,
                       RandomWalkConfig(cfg.walk.steps, cfg.walk.step_size, cfg.walk.seed))
    raw = ctx.timed("sense", plant.sense_batch, pos)
    run = ctx.train(tag or preset, raw, u, {"kind": "room", "preset": preset,
                                            "sensor": cfg.sensor, "drop_last": True})
    segments_csv(env, ctx.path(f"{preset}_segments.csv"))
    pts, mask = env.lattice(THETA_LATTICE)
    return env, plant, run, pts[mask]


def feature_grid(models: Models, plant: RoomPlant, n: int, R: int):
    """Lattice points, interior mask and the first R features at interior points."""
    pts, mask = plant.env.lattice(n)
    feats = models.features(plant.sense_batch(pts[mask]))[:, :R]
    return pts, mask, feats


def write_feature_grid(path, pts, mask, feats) -> None:
    header = ["gx", "gy"] + [f"c{i}" for i in range(feats.shape[1])]
    rows = (list(p) + list(f) for p, f in zip(pts[mask], feats))
    write_table_csv(path, header, rows)


def write_flow(path, pts, vecs) -> None:
    write_table_csv(path, ["gx", "gy", "vx", "vy"],
                    (list(p) + list(v) for p, v in zip(pts, vecs)))


def _room_means(env, pts, feats, names) -> dict:
    rooms = env.room_of(pts)
    return {nm: float(np.mean(feats[rooms == nm, 0])) for nm in names}


def _episodes(ctx: _Context, env, plant, models, cfg_nav, goals: dict, starts,
              fname: str, skip_same_room: bool) -> tuple[list, dict]:
    """Run every start against every goal; returns per-episode rows and traces."""
    rows, traces = [], {}
    start_rooms = env.room_of(starts)
    for gname, gpos in goals.items():
        goal = goal_in_feature_space(models.sfa, plant.sense(gpos), cfg_nav.R)
        goal_room = env.room_of(gpos)[0]
        for s, s_room in zip(starts, start_rooms):
            if skip_same_room and s_room == goal_room:
                continue
            tr = ctx.timed("navigate", navigate, models, plant, s, goal, cfg_nav)
            states = np.asarray(tr.states)
            cross = s_room != goal_room
            via_door = bool(np.any(env.in_door(states))) if cross else True
            end_room = env.room_of(states[-1])[0]
            rows.append([gname, s[0], s[1], s_room, goal_room, tr.outcome, tr.n_steps,
                         tr.restarts, int(cross), int(via_door), end_room, tr.distance[-1]])
            traces[(gname, tuple(s))] = states
    write_table_csv(ctx.path(fname), ["goal", "sx", "sy", "start_room", "goal_room", "outcome",
                                      "steps", "restarts", "cross_room", "via_door",
                                      "end_room", "final_dist"], rows)
    return rows, traces


def _episode_summary(rows) -> dict:
    n = len(rows)
    done = [r for r in rows if r[5] == "done"]
    cross_done = [r for r in done if r[8]]
    return {
        "n_episodes": n,
        "n_success": len(done),
        "success_rate": len(done) / n if n else 0.0,
        "n_cross_room_success": len(cross_done),
        "cross_room_success_via_door": all(r[9] for r in cross_done),
        "end_in_goal_room_rate": sum(r[10] == r[4] for r in rows) / n if n else 0.0,
        "outcomes": {k: sum(r[5] == k for r in rows) for k in sorted({r[5] for r in rows})},
    }


# ---------------------------------------------------------------------------
# 1-D experiments
# ---------------------------------------------------------------------------

def _interval_fit(ctx: _Context, x: np.ndarray, tag: str, r: int, *, basis=None,
                  degree=None, expansion=None) -> TrainingRun:
    u = np.zeros_like(x)
    u[:-1] = np.diff(x, axis=0)
    return ctx.train(tag, x, u, {"kind": "interval", "a": 0.0, "b": 100.0},
                     basis=basis, degree=degree, r=r, expansion=expansion)


def exp_harmonics_1d(ctx: _Context) -> dict:
    cfg = ctx.cfg
    length = float(cfg.params.get("length", 100.0))
    step = cfg.walk.step_size
    n_harm = 4
    out = {"length": length}
    profile_x = np.linspace(0.0, length, 401)
    for tag, steps in (("long", cfg.walk.steps), ("short", int(cfg.params.get("short_steps",
                                                                              30_000)))):
        x = ctx.timed("explore", interval_walk_1d, steps, length, step, cfg.walk.seed)
        run = _interval_fit(ctx, x, f"harmonics_{tag}", n_harm)
        y = run.features
        corr = [_abs_corr(y[:, i], harmonic_eval(
            HarmonicReference("uniform_cosine", i + 1, length), x[:, 0])) for i in range(n_harm)]
        cheb = _abs_corr(y[:, 1], chebyshev_compose(2, y[:, 0]))
        out[tag] = {
            "steps": steps,
            "cosine_abs_corr": corr,
            "chebyshev_abs_corr": cheb,
            "spearman_c1_position": _spearman(y[:, 0], x[:, 0]),
            "delta_values": run.models.sfa.delta_values,
        }
        prof = sfa_extract(run.models.sfa, profile_x[:, None])
        ideal = np.column_stack([harmonic_eval(HarmonicReference("uniform_cosine", i + 1, length),
                                               profile_x) for i in range(n_harm)])
        write_table_csv(ctx.path(f"profile_{tag}.csv"),
                        ["x"] + [f"c{i}" for i in range(n_harm)]
                        + [f"ideal{i}" for i in range(n_harm)],
                        (np.concatenate([[a], b, c]) for a, b, c in zip(profile_x, prof, ideal)))
        ctx.figure(plot_curves, profile_x, {f"c{i + 1}": prof[:, i] for i in range(n_harm)},
                   ctx.path(f"profile_{tag}.png"),
                   refs={f"ideal {i + 1}": ideal[:, i] for i in range(n_harm)})
    return out


def exp_hermite(ctx: _Context) -> dict:
    cfg = ctx.cfg
    rho = float(cfg.params.get("rho", 0.9))
    x = ctx.timed("explore", mean_reverting_walk_1d, cfg.walk.steps, rho, cfg.walk.seed)
    u = np.zeros_like(x)
    u[:-1] = np.diff(x, axis=0)
    run = ctx.train("hermite", x, u, {"kind": "line"}, r=3)
    y = run.features
    corr = [_abs_corr(y[:, i], harmonic_eval(HarmonicReference("hermite", i + 1), x[:, 0]))
            for i in range(3)]
    return {"rho": rho, "hermite_abs_corr": corr, "c1_position_abs_corr": corr[0],
            "spearman_c1_position": _spearman(y[:, 0], x[:, 0])}


def exp_bottleneck(ctx: _Context) -> dict:
    cfg = ctx.cfg
    p = cfg.params
    wcfg = RepellerWalkConfig(cfg.walk.steps, float(p.get("a", 0.0)), float(p.get("b", 100.0)),
                              cfg.walk.step_size, float(p.get("tau", 0.2)),
                              float(p.get("sigma", 5.0)), cfg.walk.seed)
    x = ctx.timed("explore", bottleneck_walk_1d, wcfg)
    counts, edges = np.histogram(x[:, 0], bins=100, range=(wcfg.a, wcfg.b))
    centers = 0.5 * (edges[1:] + edges[:-1])
    spec = ExpansionSpec(cfg.expansion.basis, cfg.degree, 1, (wcfg.a,), (wcfg.b,))
    run = _interval_fit(ctx, x, "bottleneck", 4, expansion=spec)
    grid = np.linspace(wcfg.a, wcfg.b, 2001)
    prof = sfa_extract(run.models.sfa, grid[:, None])
    slope = np.diff(prof[:, 0]) / np.diff(grid)
    mid = 0.5 * (grid[1:] + grid[:-1])
    inside = np.abs(mid - wcfg.mu) < wcfg.sigma
    sq = slope ** 2
    center_bins = np.abs(centers - wcfg.mu) < (edges[1] - edges[0])
    far_bins = np.abs(centers - wcfg.mu) > 3 * wcfg.sigma
    write_table_csv(ctx.path("occupancy.csv"), ["x0", "x1", "count"],
                    zip(edges[:-1], edges[1:], counts))
    write_table_csv(ctx.path("profile.csv"), ["x", "c0", "c1", "c2", "c3"],
                    (np.concatenate([[g], f]) for g, f in zip(grid, prof)))
    write_table_csv(ctx.path("steepness.csv"), ["x", "slope", "slope_sq"], zip(mid, slope, sq))
    ctx.figure(plot_histogram, edges, counts, ctx.path("occupancy.png"))
    ctx.figure(plot_curves, grid, {f"c{i + 1}": prof[:, i] for i in range(4)},
               ctx.path("profile.png"))
    return {
        "tau": wcfg.tau, "sigma": wcfg.sigma, "delta": wcfg.delta, "mu": wcfg.mu,
        "center_bin_count": int(counts[center_bins].min()),
        "far_bin_median": float(np.median(counts[far_bins])),
        "inner_mean_sq_slope": float(sq[inside].mean()),
        "outer_mean_sq_slope": float(sq[~inside].mean()),
        "steepness_ratio": float(sq[inside].mean() / sq[~inside].mean()),
        "spearman_c1_position": _spearman(run.features[:, 0], x[:, 0]),
    }


# ---------------------------------------------------------------------------
# 2-D rooms
# ---------------------------------------------------------------------------

def _common_room_outputs(ctx, env, plant, run, preset, goal_pos, theta, R):
    """Feature grid and flow field CSVs (plus figures) for one trained preset."""
    cfg = ctx.cfg
    n = int(cfg.params.get("grid", 50))
    pts, mask, feats = feature_grid(run.models, plant, n, run.models.sfa.n_components)
    write_feature_grid(ctx.path(f"{preset}_features.csv"), pts, mask, feats[:, :R])
    ctx.figure(plot_feature_grid, env, n, mask, feats, ctx.path(f"{preset}_features.png"))
    nf = int(cfg.params.get("flow_grid", 20))
    fpts, fmask = env.lattice(nf)
    goal = goal_in_feature_space(run.models.sfa, plant.sense(goal_pos), R)
    vecs = ctx.timed("flow", flow_field, run.models, plant, goal, _nav_config(cfg, theta, R),
                     fpts, fmask)
    write_flow(ctx.path(f"{preset}_flow.csv"), fpts, vecs)
    ctx.figure(plot_flow, env, fpts, vecs, ctx.path(f"{preset}_flow.png"), goal=goal_pos)
    return pts[mask], feats, fpts[fmask], vecs[fmask]


def exp_single_room(ctx: _Context) -> dict:
    cfg = ctx.cfg
    preset = cfg.preset or "single_room"
    env, plant, run, samples = _room_setup(ctx, preset)
    R = cfg.model.R
    goal_pos = np.asarray(cfg.params.get("goal", [0.3, 0.7]), dtype=float)
    theta = _theta(cfg, run.models, plant, samples, R)
    pts, feats, fpts, vecs = _common_room_outputs(ctx, env, plant, run, preset, goal_pos,
                                                  theta, R)
    axis_corr = max(_abs_corr(feats[:, 0], pts[:, 0]), _abs_corr(feats[:, 0], pts[:, 1]))
    to_goal = goal_pos - fpts
    inner = np.sum(vecs * to_goal, axis=1)
    far = np.linalg.norm(to_goal, axis=1) > 2 * cfg.speed
    sp, smask = env.lattice(int(cfg.params.get("start_lattice", 10)))
    rows, _ = _episodes(ctx, env, plant, run.models, _nav_config(cfg, theta, R),
                        {"goal": goal_pos}, sp[smask], "episodes.csv", False)
    return {
        "preset": preset, "R": R, "theta": theta,
        "c1_axis_abs_corr": axis_corr,
        "flow_toward_goal_fraction": float(np.mean(inner[far] > 0)),
        **_episode_summary(rows),
    }


def exp_two_rooms(ctx: _Context) -> dict:
    cfg = ctx.cfg
    preset = "two_rooms"
    env, plant, run, samples = _room_setup(ctx, preset)
    R = cfg.model.R
    theta = _theta(cfg, run.models, plant, samples, R)
    goals = {room.name: room.center for room in env.rooms}
    pts, feats, _, _ = _common_room_outputs(ctx, env, plant, run, preset, goals["top"],
                                            theta, R)
    first, second = MOST_DISTANT_ROOMS[preset]
    means = _room_means(env, pts, feats, (first, second))
    goal_feats = {k: sfa_extract(run.models.sfa, plant.sense(v)) for k, v in goals.items()}
    n = int(cfg.params.get("start_lattice", 6))
    sp, smask = env.lattice(n)
    rows, traces = _episodes(ctx, env, plant, run.models, _nav_config(cfg, theta, R), goals,
                             sp[smask], "episodes.csv", False)
    for gname, gpos in goals.items():
        ctx.figure(plot_traces, env, [t for (g, _), t in traces.items() if g == gname],
                   ctx.path(f"traces_{gname}.png"), goal=gpos)
    return {
        "preset": preset, "R": R, "theta": theta, "n_starts": int(smask.sum()),
        "c1_room_means": means,
        "c1_room_separation": abs(means[first] - means[second]),
        "goal_c1_difference": float(abs(goal_feats["top"][0] - goal_feats["bottom"][0])),
        "delta_values": run.models.sfa.delta_values,
        **_episode_summary(rows),
    }


def exp_multi_room(ctx: _Context) -> dict:
    cfg = ctx.cfg
    presets = cfg.params.get("presets", ["three_rooms", "four_rooms", "three_rooms_corridor"])
    R = cfg.model.R
    out = {"R": R, "presets": {}}
    for preset in presets:
        env, plant, run, samples = _room_setup(ctx, preset)
        theta = _theta(cfg, run.models, plant, samples, R)
        first, second = MOST_DISTANT_ROOMS[preset]
        goals = {nm: env.room(nm).center for nm in (first, second)}
        pts, feats, _, _ = _common_room_outputs(ctx, env, plant, run, preset, goals[first],
                                                theta, R)
        means = _room_means(env, pts, feats, (first, second))
        n = int(cfg.params.get("start_lattice", 6))
        sp, smask = env.lattice(n)
        rows, traces = _episodes(ctx, env, plant, run.models, _nav_config(cfg, theta, R),
                                 goals, sp[smask], f"{preset}_episodes.csv", True)
        ctx.figure(plot_traces, env, [t for (g, _), t in traces.items() if g == first],
                   ctx.path(f"{preset}_traces.png"), goal=goals[first])
        out["presets"][preset] = {
            "theta": theta,
            "most_distant_rooms": [first, second],
            "c1_room_means": means,
            "c1_room_separation": abs(means[first] - means[second]),
            **_episode_summary(rows),
        }
    return out


def exp_obstacle(ctx: _Context) -> dict:
    cfg = ctx.cfg
    preset = "obstacle"
    env, plant, run, samples = _room_setup(ctx, preset)
    tasks = {}
    traces = []
    for task, (start, goal_pos, region) in sorted(env.tasks.items()):
        for R in (1, 2):
            theta = _theta(cfg, run.models, plant, samples, R)
            goal = goal_in_feature_space(run.models.sfa, plant.sense(goal_pos), R)
            tr = ctx.timed("navigate", navigate, run.models, plant, start, goal,
                           _nav_config(cfg, theta, R))
            end = np.asarray(tr.states[-1])
            reached = bool(region.contains(end[None])[0])
            tr.to_csv(ctx.path(f"trace_{task}_R{R}.csv"))
            traces.append(np.asarray(tr.states))
            tasks[f"{task}_R{R}"] = {
                "theta": theta, "outcome": tr.outcome, "steps": tr.n_steps,
                "final_position": end, "in_target_region": reached,
                "goal_distance": float(np.linalg.norm(end - goal_pos)),
                "success": tr.success and reached,
            }
    ctx.figure(plot_traces, env, traces, ctx.path("traces.png"))
    flips = (tasks["vertical_R1"]["success"] and not tasks["horizontal_R1"]["success"]
             and tasks["horizontal_R2"]["success"])
    return {"tasks": tasks, "success_flag_flips": bool(flips),
            "U_rows": run.models.pfax.U[:2]}


def exp_pendulum(ctx: _Context) -> dict:
    cfg = ctx.cfg
    pcfg = PendulumConfig(**cfg.params.get("pendulum", {}))
    plant = PendulumPlant(pcfg)
    seeds = [int(s) for s in cfg.params.get("seeds", range(5))]
    R = cfg.model.R
    target = np.array([0.0, math.pi])
    per_seed = {}
    traces = []
    for seed in seeds:
        phase, torques = ctx.timed("explore", pendulum_random_walk, pcfg, cfg.walk.steps, seed)
        run = ctx.train(f"pendulum_seed{seed}", phase, torques,
                        {"kind": "pendulum", **dataclasses.asdict(pcfg)})
        states = phase[:, ::-1]
        theta = _theta(cfg, run.models, plant, states, R)
        goal = goal_in_feature_space(run.models.sfa, target, R)
        tr = ctx.timed("navigate", navigate, run.models, plant, np.zeros(2), goal,
                       _nav_config(cfg, theta, R, speed=cfg.navigation.speed or pcfg.tau_max))
        st = np.asarray(tr.states)
        ratio = float(np.max(pendulum_energy(st, pcfg)) / upright_energy(pcfg))
        hit = np.flatnonzero(pendulum_energy(st, pcfg) >= 0.9 * upright_energy(pcfg))
        write_table_csv(ctx.path(f"trace_seed{seed}.csv"), ["step", "velocity", "amplitude",
                                                             "torque", "energy"],
                        ([i, s[1], s[0], float(np.ravel(u)[0]), e] for i, (s, u, e) in
                         enumerate(zip(st, tr.controls, pendulum_energy(st, pcfg)))))
        traces.append(st[:, ::-1])
        per_seed[str(seed)] = {
            "theta": theta, "outcome": tr.outcome, "steps": tr.n_steps,
            "max_energy_ratio": ratio,
            "first_step_above_90pct": int(hit[0]) if hit.size else -1,
            "swing_up": bool(hit.size),
        }
    ctx.figure(plot_phase, traces, ctx.path("phase.png"))
    return {"R": R, "seeds": per_seed,
            "n_swing_up": sum(v["swing_up"] for v in per_seed.values()),
            "n_seeds": len(seeds)}


def exp_cartesian(ctx: _Context) -> dict:
    cfg = ctx.cfg
    preset = cfg.preset or "two_rooms"
    env, plant, run, samples = _room_setup(ctx, preset)
    n = int(cfg.params.get("grid", 50))
    pts, mask, feats = feature_grid(run.models, plant, n, run.models.sfa.n_components)
    write_feature_grid(ctx.path(f"{preset}_features.csv"), pts, mask, feats[:, :cfg.model.R])
    ctx.figure(plot_feature_grid, env, n, mask, feats, ctx.path(f"{preset}_features.png"))
    first, second = MOST_DISTANT_ROOMS.get(preset, (None, None))
    out = {"preset": preset, "degree": cfg.degree, "basis": cfg.expansion.basis}
    if first is not None:
        means = _room_means(env, pts[mask], feats, (first, second))
        out["c1_room_means"] = means
        out["c1_room_separation"] = abs(means[first] - means[second])
    return out


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

_DEFAULTS = {
    "harmonics-1d": dict(preset=None, walk={"steps": 500_000, "step_size": 0.5},
                         expansion={"degree": 6}, model={"r": 4, "R": 1}),
    "hermite": dict(preset=None, walk={"steps": 200_000, "step_size": 1.0},
                    expansion={"degree": 6}, model={"r": 3, "R": 1}, params={"rho": 0.9}),
    "bottleneck": dict(preset=None, walk={"steps": 1_000_000, "step_size": 0.5},
                       expansion={"basis": "legendre", "degree": 100}, model={"r": 4, "R": 1},
                       params={"tau": 0.2, "sigma": 5.0}),
    "single-room": dict(preset="single_room", model={"r": 8, "R": 2}),
    "two-rooms": dict(preset="two_rooms", model={"r": 8, "R": 3}),
    "multi-room": dict(preset=None, model={"r": 8, "R": 4}),
    "obstacle": dict(preset="obstacle", model={"r": 8, "R": 2}),
    "pendulum": dict(preset=None, walk={"steps": 10_000, "step_size": 0.4},
                     expansion={"degree": 5}, model={"r": 6, "R": 4},
                     navigation={"max_steps_total": 3000, "max_steps_per_phase": 3000}),
    "cartesian": dict(preset="two_rooms", sensor="cartesian",
                      expansion={"basis": "legendre", "degree": 20}, model={"r": 8, "R": 3}),
}

EXPERIMENTS: dict[str, Callable[[_Context], dict]] = {
    "harmonics-1d": exp_harmonics_1d,
    "hermite": exp_hermite,
    "bottleneck": exp_bottleneck,
    "single-room": exp_single_room,
    "two-rooms": exp_two_rooms,
    "multi-room": exp_multi_room,
    "obstacle": exp_obstacle,
    "pendulum": exp_pendulum,
    "cartesian": exp_cartesian,
}


def _check_name(name: str) -> None:
    if name not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {name!r}; valid: {', '.join(EXPERIMENTS)}")


def default_config(name: str) -> ExperimentConfig:
    """Built-in config of a canned experiment (the in-repo YAML files match it)."""
    _check_name(name)
    return config_from_dict({"experiment": name, "out": f"results/{name}", **_DEFAULTS[name]})


def run_experiment(name: str, cfg: Optional[ExperimentConfig] = None, out=None, *,
                   figures: bool = True) -> dict:
    """Run a canned experiment and write its artifacts to ``out``.

    Returns the metrics written to ``metrics.json``.
    """
    _check_name(name)
    cfg = cfg or default_config(name)
    out = Path(out if out is not None else cfg.out)
    ctx = _Context(name, cfg, out, figures)
    t0 = time.perf_counter()
    body = EXPERIMENTS[name](ctx)
    metrics = {"experiment": name, "seed": cfg.walk.seed, "bundles": ctx.bundles, **body}
    write_json(ctx.path(METRICS_FILE), metrics)
    (out / "config.yaml").write_text(dump_config(cfg))
    ctx.timing["total"] = time.perf_counter() - t0
    write_json(ctx.path(TIMING_FILE), ctx.timing)
    return json.loads(json.dumps(_plain(metrics)))


def experiment_names() -> list[str]:
    return list(EXPERIMENTS)


def metric_files(out) -> list[str]:
    """Files of an experiment directory that must reproduce byte for byte."""
    names = sorted(os.listdir(out))
    return [n for n in names if n != TIMING_FILE and not n.endswith(".png")]
