"""Simulated environments: polygonal rooms, 1-D walks and a pendulum."""
from .geometry import COLLISION_MARGIN, Environment2D, Room, step_agent
from .pendulum import (PendulumConfig, pendulum_energy, pendulum_random_walk, pendulum_step,
                       phase_sensor, upright_energy, wrap_angle)
from .presets import MOST_DISTANT_ROOMS, PRESETS, make_preset, segments_csv
from .sensor import cartesian_sensor, ray_cast_sensor, wall_sensor, wall_sensor_batch
from .walks import (RandomWalkConfig, RepellerWalkConfig, bottleneck_walk_1d, interval_walk_1d,
                    make_rng, mean_reverting_walk_1d, random_walk, repeller_push)

__all__ = [
    "COLLISION_MARGIN", "Environment2D", "Room", "step_agent", "PendulumConfig",
    "pendulum_energy", "pendulum_random_walk", "pendulum_step", "phase_sensor",
    "upright_energy", "wrap_angle", "MOST_DISTANT_ROOMS", "PRESETS", "make_preset",
    "segments_csv", "cartesian_sensor", "ray_cast_sensor", "wall_sensor", "wall_sensor_batch",
    "RandomWalkConfig", "RepellerWalkConfig", "bottleneck_walk_1d", "interval_walk_1d",
    "make_rng", "mean_reverting_walk_1d", "random_walk", "repeller_push",
]
