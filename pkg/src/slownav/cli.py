"""Command line interface.

Subcommands: explore, train, features, navigate, flow, experiment, presets.
Exit codes: 0 success, 1 navigation failure, 2 invalid input, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from .bundle import ModelBundle, load_bundle, make_provenance, save_bundle
from .config import ConfigError, ExperimentConfig, config_from_dict, load_config
from .envsim import (PRESETS, PendulumConfig, RandomWalkConfig, make_preset, random_walk,
                     segments_csv)
from .experiments import (experiment_names, default_config, feature_grid, run_experiment,
                          write_feature_grid, write_flow)
from .navigator import (IntervalPlant, NavigationConfig, PendulumPlant, RoomPlant,
                        default_theta, flow_field, goal_in_feature_space, navigate)
from .numeric import NumericError, read_series_csv, write_series_csv
from .pipeline import train_models

EXIT_OK = 0
EXIT_NAV_FAILURE = 1
EXIT_INVALID = 2
EXIT_NUMERIC = 3


class UsageError(ValueError):
    """Bad command line input."""


def _point(text: Optional[str], name: str) -> np.ndarray:
    if text is None:
        raise UsageError(f"--{name} is required")
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"--{name} must be comma-separated numbers, got {text!r}") from exc
    if not np.all(np.isfinite(vals)):
        raise UsageError(f"--{name} must be finite")
    return np.asarray(vals)


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else config_from_dict({})
    if getattr(args, "preset", None):
        cfg = config_from_dict({**cfg.to_dict(), "preset": args.preset})
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _plant(bundle: ModelBundle, preset: Optional[str] = None):
    info = bundle.plant
    kind = info.get("kind")
    if kind == "room":
        name = preset or info.get("preset")
        return RoomPlant(make_preset(name), info.get("sensor", "wall"),
                         bool(info.get("drop_last", True)))
    if kind == "interval":
        return IntervalPlant(float(info.get("a", 0.0)), float(info.get("b", 100.0)))
    if kind == "pendulum":
        fields = {k: info[k] for k in ("k", "dt", "tau_max", "damping") if k in info}
        return PendulumPlant(PendulumConfig(**fields))
    raise UsageError(f"bundle plant kind {kind!r} cannot be navigated")


def _theta_samples(plant) -> np.ndarray:
    if isinstance(plant, RoomPlant):
        pts, mask = plant.env.lattice(30)
        return pts[mask]
    if isinstance(plant, IntervalPlant):
        return np.linspace(plant.a, plant.b, 501)
    ang, vel = np.meshgrid(np.linspace(-np.pi, np.pi, 41), np.linspace(-2.5, 2.5, 41))
    return np.column_stack([ang.ravel(), vel.ravel()])


def _nav_config(cfg: ExperimentConfig, bundle: ModelBundle, plant) -> NavigationConfig:
    R = min(cfg.model.R, bundle.models.pfax.r)
    n = cfg.navigation
    theta = n.theta
    if theta is None:
        theta = default_theta(bundle.models, plant, _theta_samples(plant), R, n.theta_fraction)
    return NavigationConfig(theta=theta, theta_tilde=n.theta_tilde, R=R, speed=cfg.speed,
                            max_steps_total=n.max_steps_total,
                            max_steps_per_phase=n.max_steps_per_phase,
                            progress_window=n.progress_window)


def _out(args, default: str) -> Path:
    return Path(args.out or default)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_presets(args) -> int:
    if args.preset:
        env = make_preset(args.preset)
        if args.out:
            segments_csv(env, args.out)
        else:
            for i, s in enumerate(env.segments):
                print(i, *(f"{v:.6g}" for v in s))
        return EXIT_OK
    for name in PRESETS:
        print(name)
    return EXIT_OK


def cmd_explore(args) -> int:
    cfg = _config(args)
    if cfg.preset is None:
        raise UsageError("explore needs a preset (--preset or config)")
    env = make_preset(cfg.preset)
    plant = RoomPlant(env, cfg.sensor)
    pos, u = random_walk(env, RandomWalkConfig(cfg.walk.steps, cfg.walk.step_size, cfg.walk.seed))
    out = _out(args, "walk")
    out.mkdir(parents=True, exist_ok=True)
    write_series_csv(out / "positions.csv", pos, ["x", "y"])
    write_series_csv(out / "controls.csv", u, ["ux", "uy"])
    write_series_csv(out / "sensors.csv", plant.sense_batch(pos))
    (out / "walk.json").write_text(json.dumps({"preset": cfg.preset, "sensor": cfg.sensor,
                                               "steps": cfg.walk.steps,
                                               "step_size": cfg.walk.step_size,
                                               "seed": cfg.walk.seed}, sort_keys=True))
    print(f"wrote {cfg.walk.steps} steps to {out}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _config(args)
    walk = Path(args.walk)
    try:
        meta = json.loads((walk / "walk.json").read_text())
        raw = read_series_csv(walk / "sensors.csv")
        u = read_series_csv(walk / "controls.csv")
    except OSError as exc:
        raise UsageError(f"cannot read walk files in {walk}: {exc}") from exc
    preset = meta.get("preset", cfg.preset)
    if args.preset is None and args.config is None:
        cfg = config_from_dict({**cfg.to_dict(), "preset": preset})
    models = train_models(raw, u, cfg.expansion.basis, cfg.degree, cfg.model.r, cfg.model.p,
                          cfg.model.q, full_pfax=args.full_pfax or cfg.model.full_pfax)
    plant = {"kind": "room", "preset": preset, "sensor": meta.get("sensor", "wall"),
             "drop_last": True}
    out = _out(args, "model.bundle")
    save_bundle(ModelBundle(models, plant, make_provenance(cfg.to_dict(), meta.get("seed"))), out)
    print(f"wrote {out} ({models.sfa.n_components} components, "
          f"expanded dim {models.sfa.extraction.shape[0]})")
    return EXIT_OK


def cmd_features(args) -> int:
    bundle = load_bundle(args.bundle)
    plant = _plant(bundle, args.preset)
    if not isinstance(plant, RoomPlant):
        raise UsageError("features renders room bundles only")
    cfg = _config(args)
    R = min(cfg.model.R if args.config else bundle.models.sfa.n_components,
            bundle.models.sfa.n_components)
    n = args.grid or 50
    pts, mask, feats = feature_grid(bundle.models, plant, n, R)
    out = _out(args, "features")
    out.mkdir(parents=True, exist_ok=True)
    write_feature_grid(out / "features.csv", pts, mask, feats)
    if not args.no_figures:
        from .plotting import plot_feature_grid
        plot_feature_grid(plant.env, n, mask, feats, out / "features.png")
    print(f"wrote {out / 'features.csv'}")
    return EXIT_OK


def cmd_navigate(args) -> int:
    bundle = load_bundle(args.bundle)
    plant = _plant(bundle, args.preset)
    cfg = _config(args)
    nav = _nav_config(cfg, bundle, plant)
    start = plant.start_state(_point(args.start, "start"))
    goal_state = plant.start_state(_point(args.goal, "goal"))
    goal = goal_in_feature_space(bundle.models.sfa, plant.sense(goal_state), nav.R)
    trace = navigate(bundle.models, plant, start, goal, nav)
    out = _out(args, "trace.csv")
    trace.to_csv(out)
    print(f"{trace.outcome} after {trace.n_steps} steps; trace in {out}")
    return EXIT_OK if trace.success else EXIT_NAV_FAILURE


def cmd_flow(args) -> int:
    bundle = load_bundle(args.bundle)
    plant = _plant(bundle, args.preset)
    if not isinstance(plant, RoomPlant):
        raise UsageError("flow needs a room bundle")
    cfg = _config(args)
    nav = _nav_config(cfg, bundle, plant)
    goal_state = plant.start_state(_point(args.goal, "goal"))
    goal = goal_in_feature_space(bundle.models.sfa, plant.sense(goal_state), nav.R)
    pts, mask = plant.env.lattice(args.grid or 20)
    vecs = flow_field(bundle.models, plant, goal, nav, pts, mask)
    out = _out(args, "flow.csv")
    write_flow(out, pts, vecs)
    if not args.no_figures:
        from .plotting import plot_flow
        plot_flow(plant.env, pts, vecs, Path(out).with_suffix(".png"), goal=goal_state)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    name = args.name
    if name not in experiment_names():
        raise UsageError(f"unknown experiment {name!r}; valid: {', '.join(experiment_names())}")
    cfg = load_config(args.config) if args.config else default_config(name)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    out = Path(args.out or cfg.out)
    run_experiment(name, cfg, out, figures=not args.no_figures)
    print(f"wrote {out / 'metrics.json'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slownav", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, *, config=True, preset=False, bundle=False, figures=False):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=fn)
        p.add_argument("--out", help="output file or directory")
        if config:
            p.add_argument("--config", help="YAML experiment config")
            p.add_argument("--seed", type=int, help="override the walk seed")
        if preset:
            p.add_argument("--preset", choices=PRESETS, help="environment preset")
        if bundle:
            p.add_argument("--bundle", required=True, help="model bundle file")
        if figures:
            p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
        return p

    add("presets", cmd_presets, "list presets or export one as segment CSV",
        config=False, preset=True)
    add("explore", cmd_explore, "random-walk exploration", preset=True)
    p = add("train", cmd_train, "train SFA and the control predictor on a walk", preset=True)
    p.add_argument("--walk", required=True, help="directory written by explore")
    p.add_argument("--full-pfax", action="store_true", help="fit a PFAx extraction")
    p = add("features", cmd_features, "evaluate features on a lattice", preset=True,
            bundle=True, figures=True)
    p.add_argument("--grid", type=int, help="lattice size N (N x N, default 50)")
    p = add("navigate", cmd_navigate, "navigate from --start to --goal", preset=True,
            bundle=True)
    p.add_argument("--start", required=True, help="start state, e.g. 0.2,0.3")
    p.add_argument("--goal", required=True, help="goal state, e.g. 0.25,0.8")
    p = add("flow", cmd_flow, "navigation flow field on a lattice", preset=True, bundle=True,
            figures=True)
    p.add_argument("--goal", required=True, help="goal position x,y")
    p.add_argument("--grid", type=int, help="lattice size N (default 20)")
    p = add("experiment", cmd_experiment, "run a canned experiment", figures=True)
    p.add_argument("name", help=f"one of: {', '.join(experiment_names())}")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return args.func(args)
    except (NumericError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
