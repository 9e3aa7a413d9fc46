import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import cKDTree

from slownav.envsim import (
    COLLISION_MARGIN,
    PRESETS,
    Environment2D,
    PendulumConfig,
    RandomWalkConfig,
    RepellerWalkConfig,
    bottleneck_walk_1d,
    cartesian_sensor,
    make_preset,
    pendulum_random_walk,
    pendulum_step,
    random_walk,
    ray_cast_sensor,
    repeller_push,
    step_agent,
    wall_sensor,
    wall_sensor_batch,
    wrap_angle,
)
from slownav.envsim.geometry import geodesic_distances

RAY_WIDTH = 1.0 / 65536


def _interior_points(env, n, seed=0):
    rng = np.random.default_rng(seed)
    xmin, ymin, xmax, ymax = env.bounds
    cand = rng.uniform([xmin, ymin], [xmax, ymax], (40 * n, 2))
    return cand[env.is_interior(cand)][:n]


def test_square_center_reads_quarter_each():
    np.testing.assert_allclose(wall_sensor(make_preset("single_room"), (0.5, 0.5)), 0.25,
                               atol=1e-12)


@pytest.mark.parametrize("name", PRESETS)
def test_sensor_sums_to_one_and_matches_rays(name):
    env = make_preset(name)
    pts = _interior_points(env, 20, seed=PRESETS.index(name))
    s = wall_sensor_batch(env, pts)
    assert np.all(np.abs(s.sum(axis=1) - 1) <= 1e-6)
    assert np.all((s >= 0) & (s <= 1))
    for p, row in zip(pts, s):
        assert np.max(np.abs(ray_cast_sensor(env, p) - row)) <= RAY_WIDTH


def test_sensor_occlusion():
    env = make_preset("obstacle")
    open_box = Environment2D(env.segments[:4])
    p = (0.4, 0.2)
    # segment 2 is the top wall; the obstacle hides part of it
    occluded = wall_sensor(env, p)[2]
    free = wall_sensor(open_box, p)[2]
    assert occluded < free
    # from a point right below the obstacle the top wall is hidden entirely
    assert wall_sensor(env, (0.4, 0.34))[2] < wall_sensor(open_box, (0.4, 0.34))[2]


def test_sensor_rejects_boundary_and_outside():
    env = make_preset("single_room")
    for bad in [(0.0, 0.5), (1.5, 0.5), (np.nan, 0.5)]:
        with pytest.raises(ValueError):
            wall_sensor(env, bad)
    with pytest.raises(ValueError):
        wall_sensor(make_preset("obstacle"), (0.4, 0.5))


def test_segment_counts_and_closed_loops():
    assert make_preset("single_room").n_segments == 4
    assert make_preset("obstacle").n_segments >= 8
    for name in PRESETS:
        env = make_preset(name)
        starts = {tuple(np.round(s[:2], 12)) for s in env.segments}
        ends = {tuple(np.round(s[2:], 12)) for s in env.segments}
        assert starts == ends
        xmin, ymin, xmax, ymax = env.bounds
        assert xmin == pytest.approx(0) and ymin == pytest.approx(0)
        assert max(xmax, ymax) == pytest.approx(1)
    with pytest.raises(ValueError):
        make_preset("maze")


@pytest.mark.parametrize("name", ["two_rooms", "three_rooms", "four_rooms",
                                  "three_rooms_corridor", "obstacle"])
def test_interior_connected(name):
    env = make_preset(name)
    centers = [r.center for r in env.rooms if env.is_interior(r.center)[0]] or [env.start]
    d = geodesic_distances(env, np.vstack([env.start, *centers]), n=60)
    assert np.all(np.isfinite(d))


def test_cartesian_sensor():
    np.testing.assert_array_equal(cartesian_sensor((0.5, 0.5)), [0.5, 0.5])
    np.testing.assert_array_equal(cartesian_sensor((0.0, 0.0)), [0.0, 0.0])


def test_step_agent_examples():
    env = make_preset("single_room")
    np.testing.assert_array_equal(step_agent(env, (0.3, 0.4), (0, 0)), [0.3, 0.4])
    np.testing.assert_allclose(step_agent(env, (0.3, 0.4), (0.1, -0.05)), [0.4, 0.35],
                               atol=1e-15)
    out = step_agent(env, (0.5, 0.5), (1.0, 0.0))
    np.testing.assert_allclose(out, [1 - COLLISION_MARGIN, 0.5], atol=1e-12)
    with pytest.raises(ValueError):
        step_agent(env, (1.2, 0.5), (0.1, 0.0))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.floats(0, 2 * math.pi),
       st.floats(0.01, 2.0))
def test_step_agent_stays_on_segment(x, y, ang, length):
    env = make_preset("obstacle")
    p = np.array([x, y]) * [0.8, 1.0]
    if not env.is_interior(p)[0]:
        return
    disp = length * np.array([math.cos(ang), math.sin(ang)])
    out = step_agent(env, p, disp)
    assert env.is_interior(out)[0]
    t = np.dot(out - p, disp) / np.dot(disp, disp)
    assert -1e-12 <= t <= 1 + 1e-12
    np.testing.assert_allclose(out, p + t * disp, atol=1e-12)


@pytest.mark.parametrize("name", ["single_room", "two_rooms"])
def test_random_walk_contract(name):
    env = make_preset(name)
    cfg = RandomWalkConfig(3000, 0.02, 5)
    pos, u = random_walk(env, cfg)
    pos2, u2 = random_walk(env, cfg)
    np.testing.assert_array_equal(pos, pos2)
    np.testing.assert_array_equal(u, u2)
    assert np.all(env.is_interior(pos))
    np.testing.assert_allclose(np.linalg.norm(u, axis=1), 0.02, rtol=1e-12)
    steps = np.linalg.norm(np.diff(pos, axis=0), axis=1)
    assert np.all(steps <= 0.02 + 1e-12)
    # unclipped steps reproduce the intended displacement
    free = np.abs(steps - 0.02) < 1e-9
    np.testing.assert_allclose(np.diff(pos, axis=0)[free], u[:-1][free], atol=1e-12)
    with pytest.raises(ValueError):
        random_walk(env, RandomWalkConfig(10, 0.02, 0, start=(2.0, 2.0)))
    with pytest.raises(ValueError):
        RandomWalkConfig(0)


def test_pendulum_rest_and_clamp():
    cfg = PendulumConfig()
    np.testing.assert_array_equal(pendulum_step([0.0, 0.0], 0.0, cfg), [0.0, 0.0])
    s = np.array([0.3, -0.2])
    np.testing.assert_array_equal(pendulum_step(s, 2 * cfg.tau_max, cfg),
                                  pendulum_step(s, cfg.tau_max, cfg))
    np.testing.assert_array_equal(pendulum_step(s, -9.0, cfg),
                                  pendulum_step(s, -cfg.tau_max, cfg))


def test_pendulum_energy_has_no_secular_drift():
    # semi-implicit Euler conserves the shadow energy H - (dt/2)·ω·k·sin θ,
    # so the physical energy only oscillates by O(dt) without drifting
    cfg = PendulumConfig()
    s = np.array([1.0, 0.0])
    states = [s]
    for _ in range(10_000):
        s = pendulum_step(s, 0.0, cfg)
        states.append(s)
    th, om = np.array(states).T
    energy = 0.5 * om ** 2 - cfg.k * np.cos(th)
    shadow = energy - 0.5 * cfg.dt * om * cfg.k * np.sin(th)
    assert np.max(np.abs(shadow - shadow[0])) / abs(shadow[0]) < 1e-3
    early = np.ptp(energy[:1000])
    late = np.ptp(energy[-1000:])
    assert late <= 1.1 * early


@given(st.floats(-50, 50))
def test_wrap_angle_range(a):
    w = float(wrap_angle(a))
    assert -math.pi < w <= math.pi
    assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-9)


def test_pendulum_random_walk():
    phase, tau = pendulum_random_walk(steps=2000, seed=3)
    phase2, tau2 = pendulum_random_walk(steps=2000, seed=3)
    np.testing.assert_array_equal(phase, phase2)
    np.testing.assert_array_equal(tau, tau2)
    assert phase.shape == (2000, 2) and tau.shape == (2000, 1)
    assert np.all(np.abs(phase[:, 1]) <= math.pi)
    assert np.all(np.abs(tau) <= PendulumConfig().tau_max)


def test_repeller_zero_tau_is_plain_walk():
    cfg = RepellerWalkConfig(5000, tau=0.0, seed=2, start=30.0)
    x = bottleneck_walk_1d(cfg)[:, 0]
    assert np.all(np.abs(np.diff(x)) <= cfg.delta + 1e-12)
    assert np.all((x >= 0) & (x <= 100))
    assert repeller_push(50.0, RepellerWalkConfig(1, tau=1.0)) == 0.0


def test_repeller_steps_within_shifted_window():
    cfg = RepellerWalkConfig(20_000, tau=0.5, sigma=5.0, seed=1)
    x = bottleneck_walk_1d(cfg)[:, 0]
    eta = repeller_push(x[:-1], cfg)
    step = np.diff(x)
    interior = (x[1:] > cfg.a) & (x[1:] < cfg.b)
    assert np.all(step[interior] >= -cfg.delta + eta[interior] - 1e-12)
    assert np.all(step[interior] <= cfg.delta + eta[interior] + 1e-12)
    with pytest.raises(ValueError):
        RepellerWalkConfig(10, a=1.0, b=0.0)
    with pytest.raises(ValueError):
        bottleneck_walk_1d(RepellerWalkConfig(10, start=200.0))


@pytest.mark.slow
def test_repeller_histogram_has_bottleneck():
    cfg = RepellerWalkConfig(1_000_000, tau=0.2, sigma=5.0, seed=0)
    x = bottleneck_walk_1d(cfg)[:, 0]
    counts, edges = np.histogram(x, bins=100, range=(0, 100))
    centers = 0.5 * (edges[1:] + edges[:-1])
    far = counts[np.abs(centers - cfg.mu) > 3 * cfg.sigma]
    assert counts[49] < 0.5 * np.median(far) and counts[50] < 0.5 * np.median(far)


@pytest.mark.slow
@pytest.mark.parametrize("name", PRESETS)
def test_walk_visits_every_interior_cell(name):
    env = make_preset(name)
    pos, _ = random_walk(env, RandomWalkConfig(200_000, 0.02, 0))
    _, mask = env.lattice(20)
    xmin, ymin, xmax, ymax = env.bounds
    ix = np.clip(((pos[:, 0] - xmin) / (xmax - xmin) * 20).astype(int), 0, 19)
    iy = np.clip(((pos[:, 1] - ymin) / (ymax - ymin) * 20).astype(int), 0, 19)
    seen = np.zeros(400, dtype=bool)
    seen[iy * 20 + ix] = True
    assert not np.any(mask & ~seen)


@pytest.mark.parametrize("name", [p for p in PRESETS if p != "obstacle"])
def test_sensor_readings_distinguish_positions(name):
    env = make_preset(name)
    pts, mask = env.lattice(50)
    p = pts[mask]
    pairs = cKDTree(wall_sensor_batch(env, p)).query_pairs(1e-6, p=np.inf,
                                                          output_type="ndarray")
    far = np.linalg.norm(p[pairs[:, 0]] - p[pairs[:, 1]], axis=1) > 0.05
    assert not np.any(far)
