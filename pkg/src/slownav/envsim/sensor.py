"""360° wall sensor.

Each channel is the fraction of the full view (out of 2π) in which a given wall
segment is the nearest wall seen. Between two consecutive vertex directions
the nearest segment cannot change (walls do not cross), so casting one ray at
the middle of each such angular interval gives the exact fractions.
"""
from __future__ import annotations

import math

import numpy as np

from .geometry import Environment2D

SENSOR_CHUNK = 2048
ORACLE_RAYS = 65536


def _nearest_segment(segments: np.ndarray, pts: np.ndarray, ang: np.ndarray) -> np.ndarray:
    """Index of the nearest segment hit by rays from ``pts`` (N, 2) at angles ``ang`` (N, K)."""
    a = segments[:, :2]
    e = segments[:, 2:] - a
    dx = np.cos(ang)[..., None]
    dy = np.sin(ang)[..., None]
    wx = (a[:, 0][None, :] - pts[:, 0:1])[:, None, :]
    wy = (a[:, 1][None, :] - pts[:, 1:2])[:, None, :]
    denom = dx * e[:, 1] - dy * e[:, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (wx * e[:, 1] - wy * e[:, 0]) / denom
        s = (wx * dy - wy * dx) / denom
    valid = (denom != 0.0) & (t > 0.0) & (s >= 0.0) & (s <= 1.0)
    t = np.where(valid, t, np.inf)
    return np.argmin(t, axis=-1)


def wall_sensor_batch(env: Environment2D, points, chunk: int = SENSOR_CHUNK) -> np.ndarray:
    """Sensor readings for many interior points, shape (N, n_segments).

    Interior-ness is not checked here; see :func:`wall_sensor`.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    segs = env.segments
    verts = np.unique(np.vstack([segs[:, :2], segs[:, 2:]]), axis=0)
    m = segs.shape[0]
    out = np.zeros((pts.shape[0], m))
    for start in range(0, pts.shape[0], chunk):
        p = pts[start:start + chunk]
        ang = np.sort(np.arctan2(verts[None, :, 1] - p[:, 1:2], verts[None, :, 0] - p[:, 0:1]), axis=1)
        nxt = np.concatenate([ang[:, 1:], ang[:, :1] + 2 * math.pi], axis=1)
        width = nxt - ang
        nearest = _nearest_segment(segs, p, 0.5 * (ang + nxt))
        rows = np.repeat(np.arange(p.shape[0]), ang.shape[1])
        np.add.at(out[start:start + p.shape[0]], (rows, nearest.ravel()), width.ravel())
    return out / (2 * math.pi)


def wall_sensor(env: Environment2D, position) -> np.ndarray:
    """Angular fraction of the view occupied by each wall segment at ``position``."""
    pos = env.require_interior(position)
    return wall_sensor_batch(env, pos[None])[0]


def ray_cast_sensor(env: Environment2D, position, n_rays: int = ORACLE_RAYS) -> np.ndarray:
    """Reference reading from ``n_rays`` equally spaced rays (half-step offset)."""
    pos = np.asarray(position, dtype=float).reshape(1, 2)
    ang = (np.arange(n_rays) + 0.5) * (2 * math.pi / n_rays)
    counts = np.zeros(env.n_segments)
    for start in range(0, n_rays, 8192):
        nearest = _nearest_segment(env.segments, pos, ang[None, start:start + 8192])
        counts += np.bincount(nearest.ravel(), minlength=env.n_segments)
    return counts / n_rays


def cartesian_sensor(position) -> np.ndarray:
    """Plain (x, y) coordinates."""
    return np.asarray(position, dtype=float).copy()
