import json
import subprocess
import sys

import pytest

import numpy as np

from slownav.cli import EXIT_INVALID, EXIT_NAV_FAILURE, EXIT_NUMERIC, EXIT_OK, main
from slownav.numeric import write_series_csv


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    walk = root / "walk"
    assert main(["explore", "--preset", "single_room", "--seed", "3", "--out", str(walk)]) == 0
    cfg = root / "cfg.yaml"
    cfg.write_text("preset: single_room\nwalk: {steps: 20000}\nmodel: {r: 4, R: 2}\n"
                   "expansion: {degree: 3}\n")
    bundle = root / "model.bundle"
    assert main(["train", "--walk", str(walk), "--config", str(cfg), "--out", str(bundle)]) == 0
    return root, walk, cfg, bundle


def test_presets_listing(capsys, tmp_path):
    assert main(["presets"]) == EXIT_OK
    assert "two_rooms" in capsys.readouterr().out
    out = tmp_path / "seg.csv"
    assert main(["presets", "--preset", "obstacle", "--out", str(out)]) == EXIT_OK
    assert out.read_text().splitlines()[0] == "id,x0,y0,x1,y1"


def test_explore_outputs(workspace):
    _, walk, _, _ = workspace
    meta = json.loads((walk / "walk.json").read_text())
    assert meta["preset"] == "single_room" and meta["seed"] == 3
    assert (walk / "positions.csv").read_text().splitlines()[0] == "t,x,y"
    n = len((walk / "sensors.csv").read_text().splitlines()) - 1
    assert n == meta["steps"]


def test_features_and_flow(workspace):
    root, _, cfg, bundle = workspace
    out = root / "feat"
    assert main(["features", "--bundle", str(bundle), "--grid", "8", "--out", str(out)]) == 0
    assert (out / "features.csv").exists() and (out / "features.png").exists()
    flow = root / "flow.csv"
    assert main(["flow", "--bundle", str(bundle), "--config", str(cfg), "--goal", "0.3,0.7",
                 "--grid", "5", "--no-figures", "--out", str(flow)]) == 0
    assert flow.read_text().splitlines()[0] == "gx,gy,vx,vy"


def test_navigate_success(workspace):
    root, _, cfg, bundle = workspace
    trace = root / "trace.csv"
    code = main(["navigate", "--bundle", str(bundle), "--config", str(cfg), "--start",
                 "0.8,0.2", "--goal", "0.3,0.7", "--out", str(trace)])
    assert code == EXIT_OK
    assert trace.read_text().splitlines()[-1].endswith("done")


def test_navigation_failure_exit_code(workspace):
    root, _, _, bundle = workspace
    cfg = root / "short.yaml"
    cfg.write_text("preset: single_room\nmodel: {r: 4, R: 2}\n"
                   "navigation: {theta: 1.0e-12, max_steps_total: 3}\n")
    code = main(["navigate", "--bundle", str(bundle), "--config", str(cfg), "--start",
                 "0.8,0.2", "--goal", "0.3,0.7", "--out", str(root / "short.csv")])
    assert code == EXIT_NAV_FAILURE


def test_numeric_failure_exit_code(tmp_path):
    walk = tmp_path / "flat"
    walk.mkdir()
    (walk / "walk.json").write_text('{"preset": "single_room", "seed": 0}')
    write_series_csv(walk / "sensors.csv", np.full((50, 3), 0.25))
    write_series_csv(walk / "controls.csv", np.zeros((50, 2)))
    code = main(["train", "--walk", str(walk), "--out", str(tmp_path / "m.bundle")])
    assert code == EXIT_NUMERIC


@pytest.mark.parametrize("argv", [
    ["navigate", "--bundle", "BUNDLE", "--start", "2,2", "--goal", "0.3,0.7"],
    ["navigate", "--bundle", "BUNDLE", "--start", "a,b", "--goal", "0.3,0.7"],
    ["navigate", "--bundle", "missing.bundle", "--start", "0.5,0.5", "--goal", "0.3,0.7"],
    ["experiment", "nonexistent"],
    ["explore", "--preset", "maze"],
    ["frobnicate"],
])
def test_invalid_input_exit_code(workspace, argv, tmp_path):
    _, _, _, bundle = workspace
    argv = [str(bundle) if a == "BUNDLE" else a for a in argv]
    argv += ["--out", str(tmp_path / "x")] if argv[0] in {"navigate", "experiment"} else []
    assert main(argv) == EXIT_INVALID


def test_bad_config_exit_code(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("preset: single_room\nwalk: {steps: -5}\n")
    assert main(["explore", "--config", str(cfg), "--out", str(tmp_path / "w")]) == EXIT_INVALID


def test_experiment_subcommand(tmp_path):
    out = tmp_path / "hermite"
    assert main(["experiment", "hermite", "--no-figures", "--out", str(out)]) == EXIT_OK
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["experiment"] == "hermite"
    assert (out / "config.yaml").exists()


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "slownav", "--help"], capture_output=True,
                         text=True)
    assert res.returncode == 0 and "navigate" in res.stdout
